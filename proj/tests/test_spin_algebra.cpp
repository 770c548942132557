#include <doctest.h>

#include <algorithm>
#include <map>

#include "btcsense/spin_algebra.hpp"
#include "oracles.hpp"

using namespace btc;

namespace {

double maxabs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("single spin-1/2 matrices") {
  const auto ops = collective_ops(1);
  CHECK(ops.dim == 2);
  Matrix sz(2, 2);
  sz << 0.5, 0, 0, -0.5;
  CHECK(maxabs(ops.Sz - sz) == 0.0);
  Matrix sp(2, 2);
  sp << 0, 1, 0, 0;
  CHECK(maxabs(ops.Splus - sp) < 1e-15);
}

TEST_CASE("casimir trace at N=4") {
  const auto ops = collective_ops(4);
  const Matrix c = ops.Sminus * ops.Splus + ops.Splus * ops.Sminus + 2.0 * ops.Sz * ops.Sz;
  // S(S+1) = 6 on each of the 5 states, doubled by the symmetrized ladder form
  CHECK(std::abs(c.trace() - cplx(60.0)) < 1e-12);
}

TEST_CASE("commutator algebra and Casimir for N = 1..12") {
  for (int N = 1; N <= 12; ++N) {
    CAPTURE(N);
    const auto o = collective_ops(N);
    const cplx i(0, 1);
    CHECK(maxabs(o.Sx * o.Sy - o.Sy * o.Sx - i * o.Sz) < 1e-12);
    CHECK(maxabs(o.Sy * o.Sz - o.Sz * o.Sy - i * o.Sx) < 1e-12);
    CHECK(maxabs(o.Sz * o.Sx - o.Sx * o.Sz - i * o.Sy) < 1e-12);
    CHECK(maxabs(o.Splus - (o.Sx + i * o.Sy)) < 1e-15);
    CHECK(maxabs(o.Sminus - (o.Sx - i * o.Sy)) < 1e-15);
    CHECK(maxabs(o.Splus - o.Sminus.adjoint()) == 0.0);
    const Matrix cas = o.Sx * o.Sx + o.Sy * o.Sy + o.Sz * o.Sz;
    CHECK(maxabs(cas - o.casimir() * o.identity()) < 1e-12);
    for (int k = 0; k <= N; ++k) {
      CHECK(o.Sz(k, k).real() == doctest::Approx(0.5 * N - k));
      CHECK(o.Sz(k, k).imag() == 0.0);
    }
    // independent ladder construction
    const auto ref = oracle::spin(N);
    CHECK(maxabs(o.Splus - ref.Sp) < 1e-14);
  }
}

TEST_CASE("invalid sizes are rejected") {
  CHECK_THROWS_AS(collective_ops(0), std::invalid_argument);
  CHECK_THROWS_AS(collective_ops(-3), std::invalid_argument);
}

TEST_CASE("tensor embedding") {
  SUBCASE("disjoint supports commute") {
    const auto [a, b] = tensor_embed(collective_ops(1), collective_ops(1));
    CHECK(a.dim == 4);
    CHECK(maxabs(a.Sx * b.Sy - b.Sy * a.Sx) == 0.0);
    CHECK(maxabs(a.Sz * b.Splus - b.Splus * a.Sz) == 0.0);
  }
  SUBCASE("total Sz spectrum of two spin-1") {
    const auto [a, b] = tensor_embed(collective_ops(2), collective_ops(2));
    const Matrix tot = a.Sz + b.Sz;
    std::map<int, int> mult;
    for (int k = 0; k < 9; ++k) mult[static_cast<int>(std::lround(tot(k, k).real()))]++;
    CHECK(mult == std::map<int, int>{{-2, 1}, {-1, 2}, {0, 3}, {1, 2}, {2, 1}});
    CHECK(maxabs(tot - tot.diagonal().asDiagonal().toDenseMatrix()) == 0.0);
  }
  SUBCASE("mixed sizes") {
    const auto [a, b] = tensor_embed(collective_ops(1), collective_ops(2));
    CHECK(a.dim == 6);
    CHECK(b.dim == 6);
    // the A factor leads: joint index = iA * dimB + iB
    const auto ref = oracle::spin(1);
    CHECK(maxabs(a.Sx - oracle::embed_left(ref.Sx, 3)) < 1e-15);
    CHECK(maxabs(b.Sx - oracle::embed_right(oracle::spin(2).Sx, 2)) < 1e-15);
  }
  SUBCASE("Casimir in the embedded space") {
    const auto [a, b] = tensor_embed(collective_ops(3), collective_ops(2));
    const Matrix ca = a.Sx * a.Sx + a.Sy * a.Sy + a.Sz * a.Sz;
    const Matrix cb = b.Sx * b.Sx + b.Sy * b.Sy + b.Sz * b.Sz;
    CHECK(maxabs(ca - a.casimir() * a.identity()) < 1e-12);
    CHECK(maxabs(cb - b.casimir() * b.identity()) < 1e-12);
  }
}
