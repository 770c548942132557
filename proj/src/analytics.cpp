#include "btcsense/analytics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace btc::analytics {

const char* to_string(Marker m) {
  switch (m) {
    case Marker::Ok: return "ok";
    case Marker::InvalidRegime: return "invalid_regime";
    case Marker::Divergent: return "divergent";
    case Marker::Limit: return "limit";
  }
  return "unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTailTol = 1e-12;

std::vector<cplx> vacuum_series(cplx r) {
  const double q = std::norm(r);
  if (q >= 1.0) return {};
  std::vector<cplx> amp{1.0};
  double total = 1.0;
  cplx rn = 1.0;
  double dfr = 1.0;  // (2n-1)!! / (2n)!!
  const double full = 1.0 / std::sqrt(1.0 - q);
  for (int n = 1;; ++n) {
    rn *= r;
    dfr *= (2.0 * n - 1.0) / (2.0 * n);
    const cplx c = rn * std::sqrt(dfr);
    amp.push_back(0.0);
    amp.push_back(c);
    total += std::norm(c);
    // each further weight is bounded by the current one times q
    const double tail_bound = std::norm(c) * q / (1.0 - q);
    if (tail_bound < kTailTol * full || full - total < kTailTol * full) break;
    if (n > 100000) break;
  }
  const double norm = std::sqrt(total);
  for (auto& a : amp) a /= norm;
  return amp;
}

// Fluctuation coefficients for a given displacement field.
HpSolution from_beta(cplx beta) {
  HpSolution h;
  h.beta = beta;
  const double b2 = std::norm(beta);
  const double k = 2.0 - b2;
  h.A = (4.0 - 3.0 * b2) / (2.0 * std::sqrt(k));
  h.B = -beta * beta / (2.0 * std::sqrt(k));
  h.ratio = std::abs(h.B) / h.A;
  h.m_plus0 = std::conj(beta) * std::sqrt(k);
  h.valid = true;
  h.fock = vacuum_series(-h.B / h.A);
  return h;
}

HpSolution invalid() {
  HpSolution h;
  h.beta = h.B = h.m_plus0 = cplx(kNaN, kNaN);
  h.A = h.ratio = kNaN;
  h.valid = false;
  h.marker = Marker::InvalidRegime;
  return h;
}

}  // namespace

HpSolution hp_single(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("hp_single: omega_tilde/kappa must be >= 0");
  if (x > 1.0) return invalid();
  return from_beta(-I * std::sqrt(1.0 - std::sqrt(1.0 - x * x)));
}

HpCascaded hp_cascaded(double x, double dphi) {
  HpCascaded out;
  out.source = hp_single(x);
  const double y = x * x * (5.0 - 4.0 * std::cos(dphi));
  if (y > 1.0) {
    out.decoder = invalid();
    return out;
  }
  const cplx beta = -I * x * (1.0 - 2.0 * std::exp(-I * dphi)) / std::sqrt(1.0 + std::sqrt(1.0 - y));
  out.decoder = from_beta(beta);
  return out;
}

double hp_qfi_rate(double omega, double kappa) { return 4.0 * omega * omega / kappa; }

cplx hp_lambda0_qfi(double omega, double kappa, double dphi) {
  return (std::exp(-I * dphi) - 1.0) * omega * omega / kappa;
}

double hp_theta_homodyne(double omega, double kappa, double offset, double s) {
  return 2.0 * s * omega * std::sin(offset) / std::sqrt(kappa) + 0.5 * s * s;
}

double hp_theta_counting(double omega, double kappa, double dphi, double s) {
  return 2.0 * std::expm1(-s) * omega * omega / kappa * (1.0 - std::cos(dphi));
}

Tagged hp_error_homodyne(double omega, double kappa, double offset) {
  const double c = std::abs(std::cos(offset));
  if (c < 1e-15 || omega == 0.0) return {std::numeric_limits<double>::infinity(), Marker::Divergent};
  return {std::sqrt(kappa) / (2.0 * omega * c), Marker::Ok};
}

Tagged hp_error_absorber(double omega, double kappa, double dphi) {
  if (omega == 0.0) return {std::numeric_limits<double>::infinity(), Marker::Divergent};
  const double s = std::sin(dphi);
  if (std::abs(dphi) < 1e-12) return {std::sqrt(kappa) / (2.0 * omega), Marker::Limit};
  if (std::abs(s) < 1e-15) return {std::numeric_limits<double>::infinity(), Marker::Divergent};
  return {std::sqrt(kappa * (1.0 - std::cos(dphi)) / (2.0 * omega * omega * s * s)), Marker::Ok};
}

double cascaded_critical_frequency(int N, double kappa, double dphi) {
  if (N < 1) throw std::invalid_argument("N: must be >= 1");
  return 0.5 * N * kappa / std::sqrt(5.0 - 4.0 * std::cos(dphi));
}

std::vector<cplx> SuperspinSpectrum::values() const {
  std::vector<cplx> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.lambda);
  return v;
}

SuperspinSpectrum superspin_spectrum(int N, double omega, double kappa) {
  if (N < 1) throw std::invalid_argument("N: must be >= 1");
  SuperspinSpectrum sp;
  sp.N = N;
  for (int j = 0; j <= N; ++j) {
    for (int jx = -j; jx <= j; ++jx) {
      const double re = -0.25 * kappa * (jx * jx + j * (j + 1.0));
      sp.entries.push_back({j, jx, cplx(re, omega * jx)});
    }
  }
  return sp;
}

double superspin_intensity(int N) { return N * (N + 2.0) / 6.0; }

double superspin_connected_correlation(int N, double omega, double kappa, double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau: must be >= 0");
  const double n = N;
  const double a = n * (n + 2.0) / 12.0;
  const double c = (n - 1.0) * n * (n + 2.0) * (n + 3.0) / 240.0;
  return -a * std::exp(-0.75 * kappa * tau) * std::cos(omega * tau) +
         c * (std::exp(-2.5 * kappa * tau) * std::cos(2.0 * omega * tau) +
              std::exp(-1.5 * kappa * tau) / 3.0);
}

double superspin_correlation(int N, double omega, double kappa, double tau) {
  const double plateau = superspin_intensity(N) * superspin_intensity(N);
  return plateau + superspin_connected_correlation(N, omega, kappa, tau);
}

double superspin_qfi_rate(int N, double kappa) {
  const double n = N;
  return kappa * n * (n + 2.0) * ((n - 1.0) * (n + 3.0) / 135.0 + 2.0 / 3.0);
}

double superspin_qfi_rate_at(int N, double omega, double kappa) {
  const double n = N;
  const double a = n * (n + 2.0) / 12.0;
  const double c = (n - 1.0) * n * (n + 2.0) * (n + 3.0) / 240.0;
  // int_0^inf e^{-g t} cos(w t) dt = g / (g^2 + w^2)
  auto lorentz = [](double g, double w) { return g / (g * g + w * w); };
  const double integral = -a * lorentz(0.75 * kappa, omega) +
                          c * (lorentz(2.5 * kappa, 2.0 * omega) + 1.0 / (3.0 * 1.5 * kappa));
  return 8.0 * kappa * kappa * integral + 4.0 * kappa * superspin_intensity(N);
}

double matched_spectrum_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("matched_spectrum_distance: spectra must be equal-sized, non-empty");
  }
  // Hungarian algorithm with potentials, 1-based.
  const std::size_t n = a.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = std::abs(a[i0 - 1] - b[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += std::abs(a[p[j] - 1] - b[j - 1]);
  return total / static_cast<double>(n);
}

}  // namespace btc::analytics
