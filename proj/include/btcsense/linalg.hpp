#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "btcsense/types.hpp"

// Numerical kernels shared by the spectral engine: sparse LU (UMFPACK),
// dense eigenvalues (LAPACK zgeev), shift-invert Arnoldi and Krylov
// propagation.
namespace btc::linalg {

/// LU factorization of a sparse complex matrix.
class SparseLU {
 public:
  explicit SparseLU(const SparseMatrix& a);
  ~SparseLU();
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;

  Vector solve(const Vector& b) const;
  Eigen::Index size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Eigen::Index n_ = 0;
};

/// A - sigma * Identity
SparseMatrix shifted(const SparseMatrix& a, cplx sigma);

/// All eigenvalues of a dense matrix (no vectors).
Vector dense_eigenvalues(Matrix a);

struct RitzPair {
  cplx value;
  Vector vector;  // unit norm
  double residual = 0.0;  // ||A v - value v||
};

struct ArnoldiOptions {
  int krylov_dim = 30;
  int max_restarts = 40;
  double tol = 1e-11;
  int nev = 6;  // Ritz pairs reported back
};

/// Shift-invert Arnoldi for eigenvalues of A closest to sigma. The returned
/// pairs are sorted by decreasing real part; residuals are true residuals
/// of A. The pair with the largest real part among the converged ones is
/// iterated to tolerance; the others carry whatever accuracy they reached.
std::vector<RitzPair> shift_invert_arnoldi(const SparseMatrix& a, const SparseLU& lu, cplx sigma,
                                           const Vector& start, const ArnoldiOptions& opts,
                                           int* iterations = nullptr);

/// Inverse iteration polish with an existing factorization of (A - sigma).
RitzPair inverse_iteration(const SparseMatrix& a, const SparseLU& lu, cplx sigma, Vector v,
                           double tol, int max_iter, int* iterations = nullptr);

/// exp(t A) v with an adaptive Krylov scheme. Throws NumericalError
/// (StepSizeFailure) when the step size underflows.
Vector expmv(const SparseMatrix& a, const Vector& v, double t, double tol = 1e-12,
             int krylov_dim = 30);

double norm1(const SparseMatrix& a);

}  // namespace btc::linalg
