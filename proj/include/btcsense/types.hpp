#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace btc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, long>;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Failure modes of the numerical routines. Callers that sweep parameter grids
// catch these per point and record them instead of aborting.
enum class ErrorKind {
  NonConvergence,
  Degenerate,
  DegenerateSignal,
  StepSizeFailure,
  CasimirDrift,
};

const char* to_string(ErrorKind kind);

class NumericalError : public std::runtime_error {
 public:
  NumericalError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Non-fatal caveats attached to computed quantities.
enum class Flag {
  NearCritical,
  Degenerate,
  NonSmooth,
  CasimirDrift,
};

const char* to_string(Flag flag);

}  // namespace btc
