#pragma once

#include <utility>
#include <vector>

#include "btcsense/liouvillian.hpp"
#include "btcsense/spectral.hpp"
#include "btcsense/types.hpp"

namespace btc {

/// Knobs shared by the finite-difference extractions.
struct MetrologyOptions {
  double h_s = 1e-3;    // bias step
  double h_phi = 1e-3;  // phase step (capped at |dphi|/4 for the absorber)
  double near_critical = 0.05;  // relative window around a critical frequency
  SpectralOptions spectral = default_spectral();

  static SpectralOptions default_spectral() {
    SpectralOptions o;
    o.hint = cplx(0.0);  // deformed eigenvalues stay connected to the stationary 0
    o.dense_limit = 400;
    return o;
  }
};

/// A rate with its finite-difference error estimate and caveats.
struct RateResult {
  double value = 0.0;
  double error = 0.0;
  std::vector<Flag> flags;
};

/// Time-rescaled estimation error, value = numerator / denominator.
struct EstimationError {
  double value = 0.0;
  double numerator = 0.0;    // rescaled standard deviation of the record
  double denominator = 0.0;  // |d signal / d phi|
  std::vector<Flag> flags;
};

struct ScalingFit {
  double alpha = 0.0;  // value = b N^{-alpha}
  double b = 0.0;
  double alpha_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
  std::vector<double> residuals;  // in log space
};

/// -4 d^2 Re lambda0 / d dphi^2 at 0 for the QFI-deformed single BTC.
RateResult qfi_rate_spectral(const ModelParams& p, const MetrologyOptions& opts = {});

/// 8 kappa^2 int C_c + 4 kappa <L^dag L> from the stationary state.
RateResult qfi_rate_correlation(const ModelParams& p, IntegralMethod method = IntegralMethod::LinearSolve,
                                const MetrologyOptions& opts = {});

/// Homodyne protocol on the single BTC at offset p.phase_offset.
EstimationError homodyne_error(const ModelParams& p, const MetrologyOptions& opts = {});

/// Perfect-absorber protocol on the cascade at p.dphi. Throws
/// NumericalError(DegenerateSignal) for dphi = 0 or a vanishing signal slope.
EstimationError absorber_error(const ModelParams& p, const MetrologyOptions& opts = {});

/// Dominant eigenvalue of the counting-tilted cascade (the large-deviation
/// function theta_c(s, dphi)).
double theta_counting(const ModelParams& p, double s, const SpectralOptions& opts = {});

/// Dominant eigenvalue of the homodyne-deformed single BTC.
double theta_homodyne(const ModelParams& p, double s, const SpectralOptions& opts = {});

/// OLS on (ln N, ln value). Needs >= 3 points with positive N and value.
ScalingFit fit_power_law(const std::vector<std::pair<double, double>>& points);

struct QcrbCheck {
  bool ok = false;
  double margin = 0.0;  // delta_phi_bar * sqrt(f) - 1
};

/// delta_phi_bar >= (1 - tol) / sqrt(f)
QcrbCheck qcrb_check(double qfi_rate, const EstimationError& err, double tol = 0.02);

}  // namespace btc
