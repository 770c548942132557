#pragma once

#include <vector>

#include "btcsense/types.hpp"

// Closed-form companions to the numerics: Holstein-Primakoff (HP) expansion
// around the stationary mean field, and first-order superspin perturbation
// theory in the strong-drive limit. Everything here is pure.
namespace btc::analytics {

/// Regime markers are returned, never thrown, so sweeps can paint the
/// regions where a closed form does not apply.
enum class Marker { Ok, InvalidRegime, Divergent, Limit };

const char* to_string(Marker m);

struct Tagged {
  double value = 0.0;
  Marker marker = Marker::Ok;
};

// ---- Holstein-Primakoff --------------------------------------------------

struct HpSolution {
  cplx beta;         // displacement field
  double A = 0.0;    // m_{-,1} = A b + B b^dagger
  cplx B;
  double ratio = 0.0;  // |B/A|
  cplx m_plus0;        // leading order of the rescaled raising operator
  bool valid = false;
  Marker marker = Marker::Ok;

  /// Fock amplitudes of the fluctuation vacuum |E0> (index = photon number,
  /// odd entries are zero). Normalized; truncated once the tail weight of the
  /// geometric series drops below 1e-12.
  std::vector<cplx> fock;
};

/// Single BTC at omega_tilde / kappa = x (omega = x * omega_c).
HpSolution hp_single(double x);

struct HpCascaded {
  HpSolution source;
  HpSolution decoder;
};

/// Source-decoder cascade. The source coincides with hp_single(x); the
/// decoder is stationary while x^2 (5 - 4 cos dphi) <= 1.
HpCascaded hp_cascaded(double x, double dphi);

/// 4 omega^2 / kappa
double hp_qfi_rate(double omega, double kappa);

/// Leading-order dominant eigenvalue of the QFI-deformed generator,
/// (e^{-i dphi} - 1) omega^2 / kappa.
cplx hp_lambda0_qfi(double omega, double kappa, double dphi);

/// Leading-order homodyne large-deviation function
/// 2 s omega sin(offset) / sqrt(kappa) + s^2 / 2.
double hp_theta_homodyne(double omega, double kappa, double offset, double s);

/// Leading-order counting large-deviation function of the cascade
/// 2 (e^{-s} - 1) (omega^2 / kappa) (1 - cos dphi).
double hp_theta_counting(double omega, double kappa, double dphi, double s);

/// sqrt(kappa) / (2 omega |cos offset|); Divergent where the cosine vanishes.
Tagged hp_error_homodyne(double omega, double kappa, double offset);

/// sqrt(kappa (1 - cos dphi) / (2 omega^2 sin^2 dphi)). At dphi = 0 the
/// analytic limit sqrt(kappa) / (2 omega) is returned with Marker::Limit.
Tagged hp_error_absorber(double omega, double kappa, double dphi);

/// omega_c / sqrt(5 - 4 cos dphi) with omega_c = N kappa / 2.
double cascaded_critical_frequency(int N, double kappa, double dphi);

// ---- superspin ----------------------------------------------------------

struct SuperspinEntry {
  int j = 0;
  int jx = 0;
  cplx lambda;
};

struct SuperspinSpectrum {
  int N = 0;
  std::vector<SuperspinEntry> entries;  // (N+1)^2 of them

  std::vector<cplx> values() const;
};

/// lambda_{j,jx} = i omega jx - kappa/4 (jx^2 + j(j+1)), j = 0..N, |jx| <= j.
SuperspinSpectrum superspin_spectrum(int N, double omega, double kappa);

/// Strong-drive approximation of C(tau) = Tr[L^dag L e^{G tau}(L rho L^dag)].
double superspin_correlation(int N, double omega, double kappa, double tau);

/// C(tau) minus its plateau N^2 (N+2)^2 / 36.
double superspin_connected_correlation(int N, double omega, double kappa, double tau);

/// <L^dag L> of the maximally mixed state, N (N+2) / 6. Its square is the
/// plateau of superspin_correlation.
double superspin_intensity(int N);

/// kappa N (N+2) [(N-1)(N+3)/135 + 2/3], the omega -> infinity limit.
double superspin_qfi_rate(int N, double kappa);

/// 8 kappa^2 int C_c + 4 kappa <L^dag L> with the superspin C_c at finite
/// omega; tends to superspin_qfi_rate as omega grows.
double superspin_qfi_rate_at(int N, double omega, double kappa);

/// Minimum-cost one-to-one matching between two equally sized spectra;
/// returns the mean |a_i - b_pi(i)|.
double matched_spectrum_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);

}  // namespace btc::analytics
