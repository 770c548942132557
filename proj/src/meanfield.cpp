#include "btcsense/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace btc::meanfield {

State default_initial() {
  const double tilt = 1e-3;
  const Vec3 m{tilt, 0.0, std::sqrt(1.0 - tilt * tilt)};
  return {m, m, 0.0};
}

Rhs rhs(const State& st, double w, double k, double dphi) {
  const auto& [sx, sy, sz] = st.mS;
  const auto& [dx, dy, dz] = st.mD;
  const double c = std::cos(dphi), s = std::sin(dphi);
  return {
      k * sx * sz,
      -w * sz + k * sy * sz,
      w * sy - k * (sx * sx + sy * sy),
      k * (dx * dz + 2.0 * sx * dz * c - 2.0 * sy * dz * s),
      -w * dz + k * (dz * dy + 2.0 * sx * dz * s + 2.0 * sy * dz * c),
      w * dy - 2.0 * k * ((sx * dx + sy * dy) * c + (sx * dy - sy * dx) * s) -
          k * (dx * dx + dy * dy),
  };
}

namespace {

State advance(const State& st, const Rhs& d, double h) {
  State out = st;
  for (int i = 0; i < 3; ++i) {
    out.mS[i] += h * d[i];
    out.mD[i] += h * d[i + 3];
  }
  out.time += h;
  return out;
}

double norm2(const Vec3& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

}  // namespace

Trajectory integrate(const State& init, double w, double k, double dphi, double t_end, double dt,
                     double drift_tol) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt: must be > 0");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end: must be >= 0");
  if (std::abs(norm2(init.mS) - 1.0) > 1e-12 || std::abs(norm2(init.mD) - 1.0) > 1e-12) {
    throw std::invalid_argument("init: |mS|^2 and |mD|^2 must equal 1");
  }
  const long steps = std::lround(std::ceil(t_end / dt - 1e-9));
  Trajectory tr;
  tr.samples.reserve(static_cast<std::size_t>(steps) + 1);
  State st = init;
  st.time = 0.0;
  tr.samples.push_back(st);
  for (long n = 0; n < steps; ++n) {
    const double h = std::min(dt, t_end - st.time);
    const Rhs k1 = rhs(st, w, k, dphi);
    const Rhs k2 = rhs(advance(st, k1, 0.5 * h), w, k, dphi);
    const Rhs k3 = rhs(advance(st, k2, 0.5 * h), w, k, dphi);
    const Rhs k4 = rhs(advance(st, k3, h), w, k, dphi);
    Rhs d;
    for (int i = 0; i < 6; ++i) d[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    st = advance(st, d, h);
    st.time = (n + 1 == steps) ? t_end : (n + 1) * dt;
    const double drift = std::max(std::abs(norm2(st.mS) - 1.0), std::abs(norm2(st.mD) - 1.0));
    tr.casimir_drift = std::max(tr.casimir_drift, drift);
    if (tr.casimir_drift > drift_tol) {
      throw NumericalError(ErrorKind::CasimirDrift,
                           "Casimir drift " + std::to_string(tr.casimir_drift) + " at t=" +
                               std::to_string(st.time) + "; reduce dt");
    }
    tr.samples.push_back(st);
  }
  return tr;
}

std::pair<cplx, cplx> stationary(double w, double k, double dphi) {
  const double x = w / k;
  return {I * x, I * x * (1.0 - 2.0 * std::exp(I * dphi))};
}

const char* to_string(Behavior b) {
  return b == Behavior::Oscillating ? "oscillating" : "relaxing";
}

Behavior classify(const std::vector<double>& series, double window_length, double floor) {
  if (window_length < 50.0) throw std::invalid_argument("window: must span at least 50 time units");
  if (series.size() < 8) throw std::invalid_argument("series: too short to classify");
  const std::size_t q = series.size() / 4;
  auto p2p = [&](std::size_t a, std::size_t b) {
    const auto [lo, hi] = std::minmax_element(series.begin() + a, series.begin() + b);
    return *hi - *lo;
  };
  const double second = p2p(q, 2 * q);
  const double last = p2p(series.size() - q, series.size());
  return (last >= 0.5 * second && last >= floor) ? Behavior::Oscillating : Behavior::Relaxing;
}

}  // namespace btc::meanfield
