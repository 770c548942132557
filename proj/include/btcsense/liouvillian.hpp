#pragma once

#include <vector>

#include "btcsense/spin_algebra.hpp"
#include "btcsense/types.hpp"

namespace btc {

/// Model parameters in units where the collective decay rate kappa sets the
/// time scale. omega_c = N * kappa / 2 is always derived, never stored.
struct ModelParams {
  int N = 1;
  double omega = 0.0;
  double kappa = 1.0;
  double dphi = 0.0;          // phase difference source vs decoder
  double phase_offset = 0.0;  // homodyne offset phi - beta
  double s = 0.0;             // counting / homodyne bias

  double omega_c() const { return 0.5 * N * kappa; }
  double omega_ratio() const { return omega / omega_c(); }

  /// Parameters with omega = ratio * omega_c.
  static ModelParams at_ratio(int N, double ratio, double kappa = 1.0);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// vec(rho)[m * d + n] = rho(m, n), i.e. |m><n| -> |m> (x) |n>*.
// Under this stacking the superoperator of rho -> A rho B is kron(A, B^T).
Vector vec(const Matrix& rho);
Matrix unvec(const Vector& v, int dim);

/// coeff * left * rho * right
struct SandwichTerm {
  cplx coeff;
  Matrix left;
  Matrix right;
};

/// Vectorized generator d/dt vec(rho) = G vec(rho).
///
/// Holds both the sandwich-term list (used for the matrix-free action) and
/// the assembled sparse matrix (used by the factorization-based solvers).
class Superoperator {
 public:
  Superoperator(int dim, std::vector<SandwichTerm> terms, bool trace_preserving);

  int dim() const { return dim_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(dim_) * dim_; }
  bool trace_preserving() const { return trace_preserving_; }

  const SparseMatrix& matrix() const { return matrix_; }
  const std::vector<SandwichTerm>& terms() const { return terms_; }
  Matrix dense() const { return Matrix(matrix_); }

  /// Sparse matrix-vector product.
  Vector apply(const Vector& v) const { return matrix_ * v; }

  /// Same action evaluated term by term on the d x d matrix, never forming
  /// the d^2 x d^2 matrix.
  Matrix apply_matrix_free(const Matrix& rho) const;

  /// Returns a copy with extra terms; trace preservation is kept only if
  /// `still_trace_preserving` is set.
  Superoperator with_terms(std::vector<SandwichTerm> extra, bool still_trace_preserving) const;

 private:
  int dim_;
  std::vector<SandwichTerm> terms_;
  SparseMatrix matrix_;
  bool trace_preserving_;
};

/// Sandwich terms for -i[H, rho] + rate * D[L] rho.
std::vector<SandwichTerm> lindblad_terms(const Matrix& H, const Matrix& L, double rate);

/// Single boundary time crystal: H = omega Sx, L = S-.
Superoperator build_btc(const ModelParams& p);

/// Jump operator of the single system (S-).
Matrix btc_jump(int N);

/// Source -> decoder cascade. With `coupled == false` the cascade coupling
/// (H_casc and the cross terms of D[L_casc]) is dropped, leaving two
/// independent systems.
Superoperator build_cascaded(const ModelParams& p, bool coupled = true);

/// L_casc = e^{-i dphi} S-^S + S-^D on the joint space (source leading).
Matrix cascaded_jump(const ModelParams& p);

/// base + kappa (e^{-i dphi} - 1) L rho L^dagger
Superoperator deform_qfi(const Superoperator& base, const Matrix& L, double dphi, double kappa);

/// base + kappa (e^{-s} - 1) L rho L^dagger
Superoperator tilt_counting(const Superoperator& base, const Matrix& L, double s, double kappa);

/// base - s sqrt(kappa) (S- e^{-i offset} rho + rho S+ e^{i offset}) + s^2/2 rho,
/// where offset = phi - beta.
Superoperator deform_homodyne(const Superoperator& base, const Matrix& Sminus, double s,
                              double phase_offset, double kappa);

}  // namespace btc
