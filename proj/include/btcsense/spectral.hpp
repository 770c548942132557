#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "btcsense/liouvillian.hpp"
#include "btcsense/types.hpp"

namespace btc {

/// Hermitian, unit-trace, positive semidefinite d x d matrix. The constructor
/// validates and throws std::invalid_argument on violation.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix data);

  /// Hermitizes (rho + rho^dagger)/2 and renormalizes the trace, then validates.
  static DensityMatrix normalized(const Matrix& raw);

  int dim() const { return static_cast<int>(data_.rows()); }
  const Matrix& data() const { return data_; }
  Vector vec() const { return btc::vec(data_); }

  double purity() const;
  Eigen::VectorXd eigenvalues() const;

 private:
  Matrix data_;
};

struct SpectralResult {
  cplx eigenvalue;
  Vector right_vector;
  double residual = 0.0;  // ||G v - lambda v|| / ||v||
  int iterations = 0;
  bool degenerate = false;      // another eigenvalue within 1e-9 in real part
  std::optional<cplx> partner;  // that eigenvalue, when flagged
};

enum class EigenMethod { Auto, Dense, ShiftInvert, Propagation };

struct SpectralOptions {
  EigenMethod method = EigenMethod::Auto;
  double tol = 1e-9;
  Eigen::Index dense_limit = 2500;  // Auto uses the dense route up to this d^2
  double shift_offset = 0.05;       // real shift to the right of the hint
  std::optional<cplx> hint;
  int max_iter = 200;
  double degeneracy_tol = 1e-9;
};

/// Eigenvalue of maximal real part. Throws NumericalError(NonConvergence)
/// if the residual cannot be brought below opts.tol.
SpectralResult dominant_eigenvalue(const Superoperator& gen, const SpectralOptions& opts = {});

/// Null vector of a trace-preserving generator. Throws
/// NumericalError(NonConvergence) when the zero eigenvalue is degenerate.
DensityMatrix steady_state(const Superoperator& gen, const SpectralOptions& opts = {});

/// e^{G t}[x] for an arbitrary (not necessarily physical) operator x.
Matrix propagate_operator(const Superoperator& gen, const Matrix& x, double t, double tol = 1e-12);

/// e^{G t}[rho0]; gen must be trace preserving.
DensityMatrix propagate(const Superoperator& gen, const DensityMatrix& rho0, double t,
                        double tol = 1e-12);

/// C(tau) = Tr[L^dagger L e^{G tau}(L rho_ss L^dagger)] for each tau >= 0.
std::vector<cplx> two_time_correlation(const Superoperator& gen, const Matrix& L,
                                       const DensityMatrix& rho_ss,
                                       const std::vector<double>& taus);

enum class IntegralMethod { LinearSolve, Quadrature };

/// int_0^inf [Tr(O e^{G tau} X) - Tr(O rho_ss) Tr(X)] d tau for a trace
/// preserving G with unique stationary state rho_ss.
///
/// LinearSolve evaluates the sum over decaying modes in closed form through
/// the bordered system G z = X - Tr(X) rho_ss, Tr z = 0 (result -Tr(O z)).
/// Quadrature propagates and integrates panel by panel until the connected
/// part drops below 1e-10 of its initial value.
cplx connected_correlation_integral(const Superoperator& gen, const DensityMatrix& rho_ss,
                                   const Matrix& observable, const Matrix& x,
                                   IntegralMethod method = IntegralMethod::LinearSolve);

struct DerivativeEstimate {
  double value = 0.0;
  double error = 0.0;      // |Richardson - finest central difference|
  bool nonsmooth = false;  // stencil halving moved the result by more than 1%
};

/// Central difference of order 1 or 2 at x0 with one Richardson step (h, h/2).
DerivativeEstimate derivative_at(const std::function<double(double)>& f, double x0, double h,
                                 int order);

/// d^2 f / dx^2 at 0.
DerivativeEstimate mixed_derivative_at_zero(const std::function<double(double)>& f, double h);

/// d^2 f / dx dy at (x0, y0) with one Richardson step.
DerivativeEstimate mixed_derivative_at(const std::function<double(double, double)>& f, double x0,
                                       double y0, double hx, double hy);

/// Trace of a row-major vectorized d x d matrix.
cplx vec_trace(const Vector& v, int dim);

}  // namespace btc
