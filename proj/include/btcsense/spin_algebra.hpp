#pragma once

#include <utility>

#include "btcsense/types.hpp"

namespace btc {

/// Collective spin operators of N two-level emitters restricted to the
/// maximally polarized sector S = N/2.
///
/// Basis ordering is fixed to descending m_z: index k holds |S, S - k>, so
/// Sz = diag(N/2, N/2 - 1, ..., -N/2). Every other module relies on this.
struct SpinOperatorSet {
  int N = 0;
  int dim = 0;  // Hilbert dimension the matrices act on (N+1, or larger when embedded)
  Matrix Sx, Sy, Sz, Splus, Sminus;

  double spin() const { return 0.5 * N; }
  double casimir() const { return spin() * (spin() + 1.0); }
  Matrix identity() const { return Matrix::Identity(dim, dim); }
};

/// Throws std::invalid_argument for N < 1.
SpinOperatorSet collective_ops(int N);

/// Embeds two operator sets into the joint space A (x) B, with A the
/// leading tensor factor: joint index = iA * dim_B + iB.
std::pair<SpinOperatorSet, SpinOperatorSet> tensor_embed(const SpinOperatorSet& a,
                                                         const SpinOperatorSet& b);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace btc
