#include "btcsense/spin_algebra.hpp"

#include <cmath>
#include <string>

namespace btc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::DegenerateSignal: return "DegenerateSignal";
    case ErrorKind::StepSizeFailure: return "StepSizeFailure";
    case ErrorKind::CasimirDrift: return "CasimirDrift";
  }
  return "Unknown";
}

const char* to_string(Flag flag) {
  switch (flag) {
    case Flag::NearCritical: return "near_critical";
    case Flag::Degenerate: return "degenerate";
    case Flag::NonSmooth: return "non_smooth";
    case Flag::CasimirDrift: return "casimir_drift";
  }
  return "unknown";
}

SpinOperatorSet collective_ops(int N) {
  if (N < 1) {
    throw std::invalid_argument("collective_ops: N must be >= 1, got " + std::to_string(N));
  }
  const int d = N + 1;
  const double S = 0.5 * N;

  SpinOperatorSet ops;
  ops.N = N;
  ops.dim = d;
  ops.Sz = Matrix::Zero(d, d);
  ops.Splus = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = S - k;
    ops.Sz(k, k) = m;
    // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and |m+1> sits at index k-1.
    if (k > 0) ops.Splus(k - 1, k) = std::sqrt(S * (S + 1.0) - m * (m + 1.0));
  }
  ops.Sminus = ops.Splus.adjoint();
  ops.Sx = 0.5 * (ops.Splus + ops.Sminus);
  ops.Sy = (-0.5 * I) * (ops.Splus - ops.Sminus);
  return ops;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

std::pair<SpinOperatorSet, SpinOperatorSet> tensor_embed(const SpinOperatorSet& a,
                                                         const SpinOperatorSet& b) {
  const Matrix ia = Matrix::Identity(a.dim, a.dim);
  const Matrix ib = Matrix::Identity(b.dim, b.dim);
  auto left = [&](const Matrix& m) { return kron(m, ib); };
  auto right = [&](const Matrix& m) { return kron(ia, m); };

  SpinOperatorSet ea{a.N, a.dim * b.dim, left(a.Sx), left(a.Sy), left(a.Sz), left(a.Splus),
                     left(a.Sminus)};
  SpinOperatorSet eb{b.N, a.dim * b.dim, right(b.Sx), right(b.Sy), right(b.Sz), right(b.Splus),
                     right(b.Sminus)};
  return {std::move(ea), std::move(eb)};
}

}  // namespace btc
