#include <doctest.h>

#include <cmath>
#include <random>

#include "btcsense/analytics.hpp"
#include "btcsense/liouvillian.hpp"
#include "btcsense/metrology.hpp"
#include "btcsense/spectral.hpp"
#include "oracles.hpp"

using namespace btc;

namespace {

Matrix random_matrix(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

Matrix random_state(int d, std::mt19937& rng) {
  const Matrix a = random_matrix(d, rng);
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

double maxabs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("vec and unvec are inverse row-major maps") {
  std::mt19937 rng(1);
  const Matrix a = random_matrix(4, rng);
  const Vector v = vec(a);
  CHECK(v(1) == a(0, 1));
  CHECK(v(4) == a(1, 0));
  CHECK(maxabs(unvec(v, 4) - a) == 0.0);
  CHECK(maxabs(oracle::vec(a) - v) == 0.0);
}

TEST_CASE("sandwich vectorization identity") {
  std::mt19937 rng(2);
  for (int d : {2, 3, 5}) {
    const Matrix A = random_matrix(d, rng), B = random_matrix(d, rng), rho = random_matrix(d, rng);
    const Superoperator op(d, {{cplx(0.7, -0.2), A, B}}, false);
    const Matrix direct = cplx(0.7, -0.2) * A * rho * B;
    CHECK(maxabs(unvec(op.apply(vec(rho)), d) - direct) < 1e-12);
    CHECK(maxabs(op.apply_matrix_free(rho) - direct) < 1e-12);
  }
}

TEST_CASE("generators match the entry-wise oracle") {
  SUBCASE("single BTC") {
    for (int N : {1, 2, 5}) {
      const auto p = ModelParams::at_ratio(N, 1.3);
      CHECK(maxabs(build_btc(p).dense() - oracle::btc(N, p.omega, p.kappa)) < 1e-12);
    }
  }
  SUBCASE("cascade") {
    for (double dphi : {0.0, kPi / 2, 2.1}) {
      auto p = ModelParams::at_ratio(2, 0.8, 0.7);
      p.dphi = dphi;
      CHECK(maxabs(build_cascaded(p).dense() - oracle::cascaded(2, p.omega, p.kappa, dphi)) <
            1e-12);
      CHECK(maxabs(cascaded_jump(p) - oracle::cascaded_jump(2, dphi)) < 1e-15);
    }
  }
}

TEST_CASE("trace preservation on random states") {
  std::mt19937 rng(3);
  auto p = ModelParams::at_ratio(2, 2.0);
  p.dphi = 0.4;
  const auto single = build_btc(ModelParams::at_ratio(4, 0.7));
  const auto casc = build_cascaded(p);
  CHECK(single.trace_preserving());
  CHECK(casc.trace_preserving());
  for (int k = 0; k < 100; ++k) {
    const Matrix r1 = random_state(5, rng);
    const Matrix r2 = random_state(9, rng);
    CHECK(std::abs(single.apply_matrix_free(r1).trace()) < 1e-12);
    CHECK(std::abs(vec_trace(casc.apply(vec(r2)), 9)) < 1e-12);
  }
}

TEST_CASE("zero deformation leaves the spectrum unchanged") {
  const auto p = ModelParams::at_ratio(3, 1.5);
  const auto base = build_btc(p);
  const Matrix L = btc_jump(3);
  const Matrix g0 = base.dense();
  CHECK(maxabs(deform_qfi(base, L, 0.0, 1.0).dense() - g0) < 1e-15);
  CHECK(maxabs(tilt_counting(base, L, 0.0, 1.0).dense() - g0) < 1e-15);
  CHECK(maxabs(deform_homodyne(base, L, 0.0, 0.3, 1.0).dense() - g0) < 1e-15);
  CHECK_FALSE(deform_qfi(base, L, 0.1, 1.0).trace_preserving());
}

TEST_CASE("deformations match oracle terms") {
  const auto p = ModelParams::at_ratio(3, 0.6);
  const auto base = build_btc(p);
  const auto s = oracle::spin(3);
  const Matrix id = Matrix::Identity(4, 4);
  const double x = 0.37;
  const Matrix g0 = oracle::btc(3, p.omega, p.kappa);
  const cplx eq = std::exp(cplx(0, -x)) - 1.0;
  CHECK(maxabs(deform_qfi(base, s.Sm, x, 1.0).dense() -
               (g0 + oracle::dense_generator(4, {{eq, s.Sm, s.Sp}}))) < 1e-12);
  const double off = 0.9;
  const Matrix extra = oracle::dense_generator(
      4, {{-x * std::exp(cplx(0, -off)), s.Sm, id}, {-x * std::exp(cplx(0, off)), id, s.Sp},
          {0.5 * x * x, id, id}});
  CHECK(maxabs(deform_homodyne(base, s.Sm, x, off, 1.0).dense() - (g0 + extra)) < 1e-12);
}

TEST_CASE("uncoupled cascade is two independent systems") {
  auto p = ModelParams::at_ratio(2, 1.7);
  p.dphi = 0.8;
  const Matrix g1 = oracle::btc(2, p.omega, p.kappa);
  // Generator of rho_S (x) rho_D reshuffled to the joint row-major stacking.
  const int d = 3, D = 9;
  Matrix expect = Matrix::Zero(D * D, D * D);
  auto idx = [&](int a, int b, int c, int e) { return (a * d + c) * D + (b * d + e); };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          for (int a2 = 0; a2 < d; ++a2)
            for (int b2 = 0; b2 < d; ++b2) {
              expect(idx(a, b, c, e), idx(a2, b2, c, e)) += g1(a * d + b, a2 * d + b2);
              expect(idx(c, e, a, b), idx(c, e, a2, b2)) += g1(a * d + b, a2 * d + b2);
            }
  CHECK(maxabs(build_cascaded(p, false).dense() - expect) < 1e-12);
}

TEST_CASE("QFI deformation: conjugate symmetry in dphi") {
  const auto p = ModelParams::at_ratio(4, 1.2);
  const auto base = build_btc(p);
  const Matrix L = btc_jump(4);
  SpectralOptions o;
  o.method = EigenMethod::Dense;
  for (double x : {0.05, 0.3, 1.0}) {
    const cplx a = dominant_eigenvalue(deform_qfi(base, L, x, 1.0), o).eigenvalue;
    const cplx b = dominant_eigenvalue(deform_qfi(base, L, -x, 1.0), o).eigenvalue;
    CHECK(std::abs(a - std::conj(b)) < 1e-10);
  }
}

TEST_CASE("tilted dominant eigenvalue against the oracle") {
  auto p = ModelParams::at_ratio(5, 0.4);
  const auto base = build_btc(p);
  const auto s = oracle::spin(5);
  const double sb = 0.2;
  const Matrix g = oracle::btc(5, p.omega, 1.0) +
                   oracle::dense_generator(6, {{std::exp(-sb) - 1.0, s.Sm, s.Sp}});
  const cplx ref = oracle::dominant(g);
  for (auto m : {EigenMethod::Dense, EigenMethod::ShiftInvert}) {
    SpectralOptions o;
    o.method = m;
    o.hint = cplx(0.0);
    const auto r = dominant_eigenvalue(tilt_counting(base, btc_jump(5), sb, 1.0), o);
    CHECK(std::abs(r.eigenvalue - ref) < 1e-8);
  }
}

TEST_CASE("counting tilt of the cascade vanishes at s = 0") {
  for (double dphi : {0.0, 0.5, kPi}) {
    auto p = ModelParams::at_ratio(2, 0.5);
    p.dphi = dphi;
    CHECK(std::abs(theta_counting(p, 0.0)) < 1e-10);
  }
}

TEST_CASE("counting tilt against the intensity law") {
  auto p = ModelParams::at_ratio(5, 0.35);
  p.dphi = 0.1;
  for (double s : {-0.1, -0.05, 0.05, 0.1}) {
    const double ref = 2.0 * std::expm1(-s) * p.omega * p.omega * (1.0 - std::cos(0.1));
    CHECK(std::abs(theta_counting(p, s) - ref) <= 0.05 * std::abs(ref));
  }
  // the dark state emits nothing
  p.dphi = 0.0;
  for (double s : {-0.3, 0.2}) CHECK(std::abs(theta_counting(p, s)) < 1e-12);
}

TEST_CASE("homodyne s^2 coefficient is 1/2 deep in the stationary phase") {
  auto p = ModelParams::at_ratio(10, 0.1);
  p.phase_offset = 0.1;
  // least squares for a s + b s^2 over symmetric points
  double num = 0, den = 0;
  for (double s : {0.01, 0.02}) {
    num += s * s * (theta_homodyne(p, s) + theta_homodyne(p, -s));
    den += 2 * std::pow(s, 4);
  }
  CHECK(num / den == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("homodyne deformation against the stationary expansion at N = 30") {
  const auto p = [] {
    auto q = ModelParams::at_ratio(30, 0.5);
    q.phase_offset = 0.4;
    return q;
  }();
  for (double s : {-0.05, 0.05}) {
    const double num = theta_homodyne(p, s);
    const double hp = analytics::hp_theta_homodyne(p.omega, 1.0, 0.4, s);
    CHECK(std::abs(num - hp) <= 0.03 * std::abs(hp));
  }
}

TEST_CASE("QFI deformation against the stationary expansion at N = 30") {
  const auto p = ModelParams::at_ratio(30, 0.5);
  const double x = 0.05;
  const auto r = dominant_eigenvalue(deform_qfi(build_btc(p), btc_jump(30), x, 1.0),
                                     MetrologyOptions::default_spectral());
  const cplx hp = analytics::hp_lambda0_qfi(p.omega, 1.0, x);
  CHECK(std::abs(r.eigenvalue.real() - hp.real()) <= 0.03 * std::abs(hp.real()));
  CHECK(std::abs(r.eigenvalue.imag() - hp.imag()) <= 0.03 * std::abs(hp.imag()));
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.N = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams::at_ratio(2, 1.0);
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams::at_ratio(2, 1.0);
  p.omega = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(ModelParams::at_ratio(3, 2.0).validate());
}
