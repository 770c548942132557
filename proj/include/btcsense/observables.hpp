#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "btcsense/liouvillian.hpp"
#include "btcsense/spectral.hpp"

namespace btc {

enum class Subsystem { Source, Decoder };

/// I: both stationary, II: decoder oscillates, III: both oscillate.
enum class Regime { I, II, III };

const char* to_string(Regime r);

/// Analytic partition by omega_c,casc and omega_c.
Regime classify_regime(const ModelParams& p);

/// kappa <L_casc^dag L_casc> in the cascade's stationary state.
double stationary_intensity(const ModelParams& p, const SpectralOptions& opts = {});

double purity(const DensityMatrix& rho);

/// Partial trace of a joint source (x) decoder state (source leading).
Matrix partial_trace(const Matrix& rho, Subsystem keep, std::pair<int, int> dims);

/// -sum lambda ln lambda of the reduced state, eigenvalues clipped at 1e-14.
double reduced_entropy(const DensityMatrix& rho_joint, Subsystem keep, std::pair<int, int> dims);

/// von Neumann entropy of a single density matrix (same clipping).
double entropy(const Matrix& rho);

struct PhaseDiagramCell {
  double omega_over_omegac = 0.0;
  double dphi = 0.0;
  double intensity = 0.0;
  double purity = 0.0;
  double entropy_source = 0.0;
  double entropy_decoder = 0.0;
  Regime regime = Regime::I;
  std::optional<std::string> error;  // solver failure for this cell
};

/// Stationary diagnostics on the grid (omega ratio major, dphi minor).
/// Failures stay inside their cell.
std::vector<PhaseDiagramCell> phase_diagram(int N, const std::vector<double>& omega_ratios,
                                            const std::vector<double>& dphis, int workers = 1,
                                            double kappa = 1.0, const SpectralOptions& opts = {});

}  // namespace btc
