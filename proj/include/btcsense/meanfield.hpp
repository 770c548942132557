#pragma once

#include <array>
#include <utility>
#include <vector>

#include "btcsense/types.hpp"

// Thermodynamic-limit equations of motion of the source -> decoder cascade
// for the rescaled magnetizations m = 2<S>/N, in rescaled time tau = S t
// with omega_tilde = omega / S (so omega_tilde / kappa = omega / omega_c).
namespace btc::meanfield {

using Vec3 = std::array<double, 3>;
using Rhs = std::array<double, 6>;

struct State {
  Vec3 mS{};
  Vec3 mD{};
  double time = 0.0;
};

/// Both spins near the north pole, tilted by 1e-3 along m_x (the exact pole
/// is a fixed point of several terms).
State default_initial();

Rhs rhs(const State& s, double omega_tilde, double kappa, double dphi);

struct Trajectory {
  std::vector<State> samples;  // every step, including t = 0
  double casimir_drift = 0.0;  // max | |m|^2 - 1 | over both spins
};

/// Fixed-step RK4. Throws std::invalid_argument for dt <= 0 or an
/// unnormalized initial state, NumericalError(CasimirDrift) when |m|^2
/// leaves 1 by more than `drift_tol`.
Trajectory integrate(const State& init, double omega_tilde, double kappa, double dphi,
                     double t_end, double dt = 1e-3, double drift_tol = 1e-8);

/// Stationary raising-operator means (m_+^S, m_+^D).
std::pair<cplx, cplx> stationary(double omega_tilde, double kappa, double dphi);

enum class Behavior { Relaxing, Oscillating };

const char* to_string(Behavior b);

/// Peak-to-peak of the last quarter of `series` against the second quarter:
/// oscillating when the former keeps at least half of the latter and stays
/// above `floor`. The window [t0, t1] must span at least 50 time units.
Behavior classify(const std::vector<double>& series, double window_length,
                  double floor = 1e-3);

}  // namespace btc::meanfield
