#include <doctest.h>

#include <cmath>
#include <vector>

#include "btcsense/analytics.hpp"
#include "btcsense/meanfield.hpp"

using namespace btc;
namespace mf = btc::meanfield;

TEST_CASE("south pole is a fixed point of pure decay") {
  const mf::State s{{0, 0, -1}, {0, 0, -1}, 0.0};
  for (double v : mf::rhs(s, 0.0, 1.0, 0.3)) CHECK(v == 0.0);
}

TEST_CASE("stationary source values annihilate the source flow") {
  for (double x : {0.1, 0.5, 0.9}) {
    const double my = x;
    const double mz = -std::sqrt(1.0 - x * x);
    const mf::State s{{0, my, mz}, {0.3, 0.1, std::sqrt(0.9)}, 0.0};
    const auto d = mf::rhs(s, x, 1.0, 1.0);
    CHECK(std::abs(d[0]) < 1e-15);
    CHECK(std::abs(d[1]) < 1e-15);
    CHECK(std::abs(d[2]) < 1e-15);
  }
}

TEST_CASE("decoder at dphi = 0 retraces the mirrored source") {
  // with mD = (-mx, -my, mz) the decoder velocity is the mirrored source
  // velocity reversed in time
  const mf::State s{{0.3, -0.5, std::sqrt(1 - 0.34)}, {-0.3, 0.5, std::sqrt(1 - 0.34)}, 0.0};
  const auto d = mf::rhs(s, 0.7, 1.3, 0.0);
  CHECK(d[3] == doctest::Approx(d[0]));
  CHECK(d[4] == doctest::Approx(d[1]));
  CHECK(d[5] == doctest::Approx(-d[2]));
}

TEST_CASE("stationary values") {
  const auto [s0, d0] = mf::stationary(0.3, 1.0, 0.0);
  CHECK(std::abs(s0 - cplx(0, 0.3)) < 1e-15);
  CHECK(std::abs(d0 - cplx(0, -0.3)) < 1e-15);
  const auto [s1, d1] = mf::stationary(0.2, 1.0, kPi);
  CHECK(std::abs(d1 - cplx(0, 0.6)) < 1e-14);
  for (double x : {0.1, 0.4, 0.8}) {
    for (double dphi : {0.0, 1.0, 2.5}) {
      const auto [ms, md] = mf::stationary(x, 1.0, dphi);
      CHECK(std::abs(ms - analytics::hp_cascaded(x, dphi).source.m_plus0) < 1e-12);
    }
  }
}

TEST_CASE("integration conserves both Casimirs") {
  for (double r : {0.1, 0.5, 4.0}) {
    const auto tr = mf::integrate(mf::default_initial(), r, 1.0, kPi, 60.0);
    CHECK(tr.casimir_drift < 1e-8);
    CHECK(tr.samples.size() == 60001);
    CHECK(tr.samples.back().time == 60.0);
  }
}

TEST_CASE("source evolves independently of the decoder") {
  mf::State a = mf::default_initial();
  mf::State b = a;
  b.mD = {0.6, 0.0, -0.8};
  const auto ta = mf::integrate(a, 0.7, 1.0, 1.2, 20.0);
  const auto tb = mf::integrate(b, 0.7, 1.0, 1.2, 20.0);
  REQUIRE(ta.samples.size() == tb.samples.size());
  bool identical = true;
  for (std::size_t i = 0; i < ta.samples.size(); ++i) identical &= ta.samples[i].mS == tb.samples[i].mS;
  CHECK(identical);
}

TEST_CASE("integration input checks") {
  CHECK_THROWS_AS(mf::integrate(mf::default_initial(), 1, 1, 0, 1, 0.0), std::invalid_argument);
  mf::State bad = mf::default_initial();
  bad.mS = {1, 1, 0};
  CHECK_THROWS_AS(mf::integrate(bad, 1, 1, 0, 1), std::invalid_argument);
  try {
    mf::integrate(mf::default_initial(), 4.0, 1.0, kPi, 50.0, 0.5);
    FAIL("expected CasimirDrift");
  } catch (const NumericalError& e) {
    CHECK(e.kind() == ErrorKind::CasimirDrift);
  }
}

TEST_CASE("persistence classification") {
  const int n = 4000;
  std::vector<double> osc(n), decay(n), flat(n);
  for (int i = 0; i < n; ++i) {
    const double t = 100.0 * i / n;
    osc[i] = 0.3 * std::cos(2.0 * t);
    decay[i] = std::exp(-0.2 * t) * std::cos(2.0 * t);
    flat[i] = -0.5 + 1e-5 * std::cos(2.0 * t);
  }
  CHECK(mf::classify(osc, 100.0) == mf::Behavior::Oscillating);
  CHECK(mf::classify(decay, 100.0) == mf::Behavior::Relaxing);
  CHECK(mf::classify(flat, 100.0) == mf::Behavior::Relaxing);
  CHECK_THROWS_AS(mf::classify(osc, 40.0), std::invalid_argument);
}
