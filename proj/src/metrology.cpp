#include "btcsense/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "btcsense/analytics.hpp"

namespace btc {

namespace {

void add_flag(std::vector<Flag>& flags, Flag f) {
  if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
}

bool near(double omega, double critical, double omega_c, double window) {
  return std::abs(omega - critical) < window * omega_c;
}

double dominant_real(const Superoperator& gen, const SpectralOptions& opts, std::vector<Flag>& flags) {
  const SpectralResult r = dominant_eigenvalue(gen, opts);
  if (r.degenerate) add_flag(flags, Flag::Degenerate);
  return r.eigenvalue.real();
}

// Memoizes stencil evaluations; stencils share points after halving.
class Memo2 {
 public:
  template <class F>
  double operator()(double x, double y, F&& f) {
    const auto key = std::make_pair(x, y);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double v = f(x, y);
    cache_.emplace(key, v);
    return v;
  }

 private:
  std::map<std::pair<double, double>, double> cache_;
};

EstimationError assemble_error(const DerivativeEstimate& var, const DerivativeEstimate& slope,
                               std::vector<Flag> flags) {
  EstimationError e;
  e.numerator = std::sqrt(std::max(var.value, 0.0));
  e.denominator = std::abs(slope.value);
  if (var.nonsmooth || slope.nonsmooth) add_flag(flags, Flag::NonSmooth);
  e.flags = std::move(flags);
  e.value = e.denominator > 0.0 ? e.numerator / e.denominator
                                : std::numeric_limits<double>::infinity();
  return e;
}

}  // namespace

RateResult qfi_rate_spectral(const ModelParams& p, const MetrologyOptions& opts) {
  p.validate();
  const Superoperator gen = build_btc(p);
  const Matrix L = btc_jump(p.N);
  RateResult out;

  // lambda0(-x) = conj(lambda0(x)) and lambda0(0) = 0, so Re lambda0 is even
  // and only positive tilts need a solve.
  std::map<double, double> memo;
  auto re_lambda = [&](double x) {
    x = std::abs(x);
    if (x == 0.0) return 0.0;
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    const double v = dominant_real(deform_qfi(gen, L, x, p.kappa), opts.spectral, out.flags);
    memo.emplace(x, v);
    return v;
  };
  const DerivativeEstimate d = derivative_at(re_lambda, 0.0, opts.h_phi, 2);
  out.value = -4.0 * d.value;
  out.error = 4.0 * d.error;
  if (d.nonsmooth) add_flag(out.flags, Flag::NonSmooth);
  if (near(p.omega, p.omega_c(), p.omega_c(), opts.near_critical)) {
    add_flag(out.flags, Flag::NearCritical);
  }
  return out;
}

RateResult qfi_rate_correlation(const ModelParams& p, IntegralMethod method,
                                const MetrologyOptions& opts) {
  p.validate();
  const Superoperator gen = build_btc(p);
  const Matrix L = btc_jump(p.N);
  const DensityMatrix rho = steady_state(gen, opts.spectral);
  const Matrix obs = L.adjoint() * L;
  const Matrix x = L * rho.data() * L.adjoint();
  const double intensity = (obs * rho.data()).trace().real();
  const cplx integral = connected_correlation_integral(gen, rho, obs, x, method);

  RateResult out;
  out.value = 8.0 * p.kappa * p.kappa * integral.real() + 4.0 * p.kappa * intensity;
  out.error = 8.0 * p.kappa * p.kappa * std::abs(integral.imag());
  if (near(p.omega, p.omega_c(), p.omega_c(), opts.near_critical)) {
    add_flag(out.flags, Flag::NearCritical);
  }
  return out;
}

double theta_homodyne(const ModelParams& p, double s, const SpectralOptions& opts) {
  p.validate();
  if (s == 0.0) return 0.0;
  const auto ops = collective_ops(p.N);
  std::vector<Flag> ignored;
  return dominant_real(deform_homodyne(build_btc(p), ops.Sminus, s, p.phase_offset, p.kappa),
                       opts, ignored);
}

double theta_counting(const ModelParams& p, double s, const SpectralOptions& opts) {
  p.validate();
  if (s == 0.0) return 0.0;
  std::vector<Flag> ignored;
  return dominant_real(tilt_counting(build_cascaded(p), cascaded_jump(p), s, p.kappa), opts,
                       ignored);
}

EstimationError homodyne_error(const ModelParams& p, const MetrologyOptions& opts) {
  p.validate();
  const Superoperator gen = build_btc(p);
  const Matrix sm = collective_ops(p.N).Sminus;
  std::vector<Flag> flags;
  Memo2 memo;
  auto theta = [&](double offset, double s) {
    if (s == 0.0) return 0.0;
    return memo(offset, s, [&](double o, double b) {
      return dominant_real(deform_homodyne(gen, sm, b, o, p.kappa), opts.spectral, flags);
    });
  };
  const double o0 = p.phase_offset;
  const auto var = derivative_at([&](double s) { return theta(o0, s); }, 0.0, opts.h_s, 2);
  const auto slope = mixed_derivative_at(theta, o0, 0.0, opts.h_phi, opts.h_s);
  if (near(p.omega, p.omega_c(), p.omega_c(), opts.near_critical)) {
    add_flag(flags, Flag::NearCritical);
  }
  EstimationError e = assemble_error(var, slope, flags);
  if (e.denominator < 1e-12) add_flag(e.flags, Flag::Degenerate);
  return e;
}

EstimationError absorber_error(const ModelParams& p, const MetrologyOptions& opts) {
  p.validate();
  if (p.dphi == 0.0) {
    throw NumericalError(ErrorKind::DegenerateSignal,
                         "absorber_error: dphi = 0 carries no first-order signal");
  }
  std::vector<Flag> flags;
  Memo2 memo;
  auto theta = [&](double dphi, double s) {
    if (s == 0.0) return 0.0;
    return memo(dphi, s, [&](double phi, double b) {
      ModelParams q = p;
      q.dphi = phi;
      return dominant_real(tilt_counting(build_cascaded(q), cascaded_jump(q), b, q.kappa),
                           opts.spectral, flags);
    });
  };
  // Keep the phase stencil on one side of dphi = 0.
  const double h_phi = std::min(opts.h_phi, 0.25 * std::abs(p.dphi));
  const auto var = derivative_at([&](double s) { return theta(p.dphi, s); }, 0.0, opts.h_s, 2);
  const auto slope = mixed_derivative_at(theta, p.dphi, 0.0, h_phi, opts.h_s);

  const double wc = p.omega_c();
  const double wcc = analytics::cascaded_critical_frequency(p.N, p.kappa, p.dphi);
  if (near(p.omega, wc, wc, opts.near_critical) || near(p.omega, wcc, wc, opts.near_critical)) {
    add_flag(flags, Flag::NearCritical);
  }
  EstimationError e = assemble_error(var, slope, flags);
  if (e.denominator < 1e-12) {
    throw NumericalError(ErrorKind::DegenerateSignal,
                         "absorber_error: |d signal / d phi| below 1e-12");
  }
  return e;
}

ScalingFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_power_law: needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [N, v] : points) {
    if (!(N > 0.0) || !(v > 0.0)) {
      throw std::invalid_argument("fit_power_law: N and value must be positive");
    }
    sx += std::log(N);
    sy += std::log(v);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [N, v] : points) {
    const double dx = std::log(N) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_power_law: N values must differ");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  ScalingFit fit;
  fit.points = points;
  fit.alpha = -slope;
  fit.b = std::exp(intercept);
  double ssr = 0.0;
  for (const auto& [N, v] : points) {
    const double r = std::log(v) - (intercept + slope * std::log(N));
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  fit.alpha_stderr = points.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

QcrbCheck qcrb_check(double qfi_rate, const EstimationError& err, double tol) {
  QcrbCheck c;
  if (!(qfi_rate > 0.0)) {
    // A vanishing QFI admits no finite error at all.
    c.margin = std::numeric_limits<double>::infinity();
    c.ok = true;
    return c;
  }
  const double product = err.value * std::sqrt(qfi_rate);
  c.margin = product - 1.0;
  c.ok = product >= 1.0 - tol;
  return c;
}

}  // namespace btc
