#include "btcsense/observables.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "btcsense/analytics.hpp"
#include "btcsense/parallel.hpp"

namespace btc {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
  }
  return "?";
}

Regime classify_regime(const ModelParams& p) {
  const double wcc = analytics::cascaded_critical_frequency(p.N, p.kappa, p.dphi);
  if (p.omega < wcc) return Regime::I;
  if (p.omega < p.omega_c()) return Regime::II;
  return Regime::III;
}

double stationary_intensity(const ModelParams& p, const SpectralOptions& opts) {
  const DensityMatrix rho = steady_state(build_cascaded(p), opts);
  const Matrix L = cascaded_jump(p);
  return std::max(0.0, p.kappa * (L.adjoint() * L * rho.data()).trace().real());
}

double purity(const DensityMatrix& rho) { return rho.purity(); }

Matrix partial_trace(const Matrix& rho, Subsystem keep, std::pair<int, int> dims) {
  const auto [ds, dd] = dims;
  if (static_cast<Eigen::Index>(ds) * dd != rho.rows()) {
    throw std::invalid_argument("partial_trace: dims do not match the joint dimension");
  }
  if (keep == Subsystem::Source) {
    Matrix out = Matrix::Zero(ds, ds);
    for (int a = 0; a < ds; ++a)
      for (int b = 0; b < ds; ++b)
        for (int k = 0; k < dd; ++k) out(a, b) += rho(a * dd + k, b * dd + k);
    return out;
  }
  Matrix out = Matrix::Zero(dd, dd);
  for (int a = 0; a < dd; ++a)
    for (int b = 0; b < dd; ++b)
      for (int k = 0; k < ds; ++k) out(a, b) += rho(k * dd + a, k * dd + b);
  return out;
}

double entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = std::max(es.eigenvalues()(i), 1e-14);
    s -= l * std::log(l);
  }
  // clipping leaves at most d * 1e-14 * |ln 1e-14| behind for a pure state
  return std::max(0.0, s);
}

double reduced_entropy(const DensityMatrix& rho_joint, Subsystem keep, std::pair<int, int> dims) {
  return entropy(partial_trace(rho_joint.data(), keep, dims));
}

std::vector<PhaseDiagramCell> phase_diagram(int N, const std::vector<double>& omega_ratios,
                                            const std::vector<double>& dphis, int workers,
                                            double kappa, const SpectralOptions& opts) {
  if (omega_ratios.empty() || dphis.empty()) {
    throw std::invalid_argument("phase_diagram: grids must be non-empty");
  }
  const std::size_t nd = dphis.size();
  return parallel_map<PhaseDiagramCell>(omega_ratios.size() * nd, workers, [&](std::size_t idx) {
    PhaseDiagramCell cell;
    ModelParams p = ModelParams::at_ratio(N, omega_ratios[idx / nd], kappa);
    p.dphi = dphis[idx % nd];
    cell.omega_over_omegac = omega_ratios[idx / nd];
    cell.dphi = p.dphi;
    cell.regime = classify_regime(p);
    try {
      const DensityMatrix rho = steady_state(build_cascaded(p), opts);
      const Matrix L = cascaded_jump(p);
      cell.intensity = std::max(0.0, kappa * (L.adjoint() * L * rho.data()).trace().real());
      cell.purity = rho.purity();
      cell.entropy_source = reduced_entropy(rho, Subsystem::Source, {N + 1, N + 1});
      cell.entropy_decoder = reduced_entropy(rho, Subsystem::Decoder, {N + 1, N + 1});
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    return cell;
  });
}

}  // namespace btc
