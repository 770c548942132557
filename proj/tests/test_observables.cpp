#include <doctest.h>

#include <cmath>
#include <random>

#include "btcsense/analytics.hpp"
#include "btcsense/observables.hpp"
#include "oracles.hpp"

using namespace btc;

namespace {

Matrix random_state(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("regime partition") {
  auto p = ModelParams::at_ratio(6, 0.2);
  p.dphi = kPi;
  CHECK(classify_regime(p) == Regime::I);
  p.omega = 0.5 * p.omega_c();
  CHECK(classify_regime(p) == Regime::II);
  p.omega = 1.0 * p.omega_c();
  CHECK(classify_regime(p) == Regime::III);
  p.dphi = 0.0;
  p.omega = 0.99 * p.omega_c();
  CHECK(classify_regime(p) == Regime::I);
}

TEST_CASE("partial trace") {
  std::mt19937 rng(7);
  const Matrix a = random_state(2, rng), b = random_state(3, rng);
  Matrix prod(6, 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) prod.block(3 * i, 3 * j, 3, 3) = a(i, j) * b;
  CHECK((partial_trace(prod, Subsystem::Source, {2, 3}) - a).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((partial_trace(prod, Subsystem::Decoder, {2, 3}) - b).cwiseAbs().maxCoeff() < 1e-14);
  const Matrix r = random_state(6, rng);
  CHECK(std::abs(partial_trace(r, Subsystem::Source, {2, 3}).trace() - 1.0) < 1e-10);
  CHECK(std::abs(partial_trace(r, Subsystem::Decoder, {2, 3}).trace() - 1.0) < 1e-10);
  CHECK_THROWS_AS(partial_trace(r, Subsystem::Source, {2, 2}), std::invalid_argument);
}

TEST_CASE("purity and entropy") {
  CHECK(purity(DensityMatrix(Matrix::Identity(36, 36) / 36.0)) == doctest::Approx(1.0 / 36));
  Matrix pure = Matrix::Zero(3, 3);
  pure(1, 1) = 1.0;
  CHECK(purity(DensityMatrix(pure)) == doctest::Approx(1.0));
  CHECK(entropy(pure) < 1e-11);
  CHECK(entropy(Matrix::Identity(5, 5) / 5.0) == doctest::Approx(std::log(5.0)));
  std::mt19937 rng(3);
  const Matrix r = random_state(4, rng);
  const DensityMatrix rho(r);
  CHECK(purity(rho) == doctest::Approx(rho.eigenvalues().squaredNorm()).epsilon(1e-12));
  CHECK(entropy(r) == doctest::Approx(oracle::entropy(r)).epsilon(1e-12));
}

TEST_CASE("product of pure states has zero reduced entropies") {
  Matrix psi = Matrix::Zero(9, 9);
  psi(4, 4) = 1.0;
  const DensityMatrix rho(psi);
  CHECK(reduced_entropy(rho, Subsystem::Source, {3, 3}) < 1e-11);
  CHECK(reduced_entropy(rho, Subsystem::Decoder, {3, 3}) < 1e-11);
}

TEST_CASE("dark state of the perfect absorber") {
  for (int N : {2, 4, 6}) {
    for (double r : {0.25, 4.0}) {
      auto p = ModelParams::at_ratio(N, r);
      p.dphi = 0.0;
      const auto rho = steady_state(build_cascaded(p));
      CHECK(stationary_intensity(p) < 1e-8);
      CHECK(purity(rho) > 1.0 - 1e-8);
      const int d = N + 1;
      const double es = reduced_entropy(rho, Subsystem::Source, {d, d});
      const double ed = reduced_entropy(rho, Subsystem::Decoder, {d, d});
      CHECK(std::abs(es - ed) < 1e-8);
    }
  }
}

TEST_CASE("intensity of the undriven cascade vanishes") {
  auto p = ModelParams{3, 0.0, 1.0};
  p.dphi = 1.0;
  CHECK(std::abs(stationary_intensity(p)) < 1e-12);
}

TEST_CASE("intensity at fixed drive peaks at dphi = pi") {
  auto p = ModelParams::at_ratio(6, 0.2);
  p.dphi = kPi;
  const double top = stationary_intensity(p);
  for (double d : {0.5, kPi / 2, 2.5}) {
    p.dphi = d;
    CHECK(stationary_intensity(p) < top);
  }
}

TEST_CASE("intensity against the oracle steady state") {
  auto p = ModelParams::at_ratio(2, 0.4);
  p.dphi = 2.0;
  const Matrix rho = oracle::stationary(oracle::cascaded(2, p.omega, 1.0, 2.0), 9);
  const Matrix L = oracle::cascaded_jump(2, 2.0);
  CHECK(stationary_intensity(p) ==
        doctest::Approx((L.adjoint() * L * rho).trace().real()).epsilon(1e-8));
}

TEST_CASE("phase diagram") {
  const std::vector<double> ratios{0.2, 0.5, 1.5, 3.0};
  const std::vector<double> dphis{0.0, kPi / 2, kPi};
  const auto cells = phase_diagram(3, ratios, dphis, 2);
  REQUIRE(cells.size() == 12);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    CHECK_FALSE(c.error.has_value());
    CHECK(c.omega_over_omegac == ratios[i / 3]);
    CHECK(c.dphi == dphis[i % 3]);
    CHECK(c.entropy_source >= 0.0);
    CHECK(c.entropy_source <= std::log(4.0) + 1e-12);
    CHECK(c.entropy_decoder <= std::log(4.0) + 1e-12);
    if (c.dphi == 0.0) {
      CHECK(c.intensity < 1e-8);
      CHECK(c.purity > 1.0 - 1e-8);
    }
    auto p = ModelParams::at_ratio(3, c.omega_over_omegac);
    p.dphi = c.dphi;
    CHECK(c.regime == classify_regime(p));
  }
  // the serial and threaded sweeps agree exactly
  const auto serial = phase_diagram(3, ratios, dphis, 1);
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(serial[i].purity == cells[i].purity);
}

TEST_CASE("full-size phase diagram has no failed cells") {
  std::vector<double> ratios, dphis;
  for (int i = 0; i < 20; ++i) {
    ratios.push_back(0.05 + i * 1.95 / 19);
    dphis.push_back(i * kPi / 19);
  }
  const auto cells = phase_diagram(6, ratios, dphis, 1);
  REQUIRE(cells.size() == 400);
  int failed = 0;
  for (const auto& c : cells) failed += c.error.has_value();
  CHECK(failed == 0);
}
