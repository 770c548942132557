#include "btcsense/liouvillian.hpp"

#include <cmath>
#include <string>

namespace btc {

namespace {

constexpr double kDropTol = 1e-15;

std::vector<Eigen::Triplet<cplx, long>> nonzeros(const Matrix& m) {
  std::vector<Eigen::Triplet<cplx, long>> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > kDropTol) out.emplace_back(i, j, m(i, j));
    }
  }
  return out;
}

SparseMatrix assemble(int dim, const std::vector<SandwichTerm>& terms) {
  const long n = static_cast<long>(dim) * dim;
  std::vector<Eigen::Triplet<cplx, long>> triplets;
  for (const auto& term : terms) {
    const auto a = nonzeros(term.left);
    const auto bt = nonzeros(term.right.transpose());
    triplets.reserve(triplets.size() + a.size() * bt.size());
    for (const auto& x : a) {
      for (const auto& y : bt) {
        triplets.emplace_back(x.row() * dim + y.row(), x.col() * dim + y.col(),
                              term.coeff * x.value() * y.value());
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune(cplx(0.0), kDropTol);
  m.makeCompressed();
  return m;
}

}  // namespace

ModelParams ModelParams::at_ratio(int N, double ratio, double kappa) {
  ModelParams p;
  p.N = N;
  p.kappa = kappa;
  p.omega = ratio * 0.5 * N * kappa;
  return p;
}

void ModelParams::validate() const {
  if (N < 1) throw std::invalid_argument("N: must be >= 1, got " + std::to_string(N));
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa: must be > 0");
  if (!(omega >= 0.0)) throw std::invalid_argument("omega: must be >= 0");
  if (!std::isfinite(dphi) || !std::isfinite(phase_offset) || !std::isfinite(s)) {
    throw std::invalid_argument("dphi/phase_offset/s: must be finite");
  }
}

Vector vec(const Matrix& rho) {
  const Eigen::Index d = rho.rows();
  Vector v(d * d);
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index n = 0; n < d; ++n) v(m * d + n) = rho(m, n);
  }
  return v;
}

Matrix unvec(const Vector& v, int dim) {
  Matrix rho(dim, dim);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) rho(m, n) = v(static_cast<Eigen::Index>(m) * dim + n);
  }
  return rho;
}

Superoperator::Superoperator(int dim, std::vector<SandwichTerm> terms, bool trace_preserving)
    : dim_(dim),
      terms_(std::move(terms)),
      matrix_(assemble(dim, terms_)),
      trace_preserving_(trace_preserving) {}

Matrix Superoperator::apply_matrix_free(const Matrix& rho) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& t : terms_) out.noalias() += t.coeff * (t.left * rho * t.right);
  return out;
}

Superoperator Superoperator::with_terms(std::vector<SandwichTerm> extra,
                                        bool still_trace_preserving) const {
  std::vector<SandwichTerm> all = terms_;
  all.insert(all.end(), std::make_move_iterator(extra.begin()),
             std::make_move_iterator(extra.end()));
  return Superoperator(dim_, std::move(all), trace_preserving_ && still_trace_preserving);
}

std::vector<SandwichTerm> lindblad_terms(const Matrix& H, const Matrix& L, double rate) {
  const Eigen::Index d = H.rows();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix LdL = L.adjoint() * L;
  return {
      {-I, H, id},
      {I, id, H},
      {cplx(rate), L, L.adjoint()},
      {cplx(-0.5 * rate), LdL, id},
      {cplx(-0.5 * rate), id, LdL},
  };
}

Matrix btc_jump(int N) { return collective_ops(N).Sminus; }

Superoperator build_btc(const ModelParams& p) {
  p.validate();
  const auto ops = collective_ops(p.N);
  return Superoperator(ops.dim, lindblad_terms(p.omega * ops.Sx, ops.Sminus, p.kappa), true);
}

Matrix cascaded_jump(const ModelParams& p) {
  const auto ops = collective_ops(p.N);
  const auto [src, dec] = tensor_embed(ops, ops);
  return std::exp(-I * p.dphi) * src.Sminus + dec.Sminus;
}

Superoperator build_cascaded(const ModelParams& p, bool coupled) {
  p.validate();
  const auto ops = collective_ops(p.N);
  const auto [src, dec] = tensor_embed(ops, ops);
  const Matrix drive = p.omega * (src.Sx + dec.Sx);

  if (!coupled) {
    auto terms = lindblad_terms(drive, std::exp(-I * p.dphi) * src.Sminus, p.kappa);
    const auto dterms = lindblad_terms(Matrix::Zero(src.dim, src.dim), dec.Sminus, p.kappa);
    terms.insert(terms.end(), dterms.begin() + 2, dterms.end());
    return Superoperator(src.dim, std::move(terms), true);
  }

  const cplx phase = std::exp(-I * p.dphi);
  const Matrix h_casc = (-0.5 * I * p.kappa) *
                        (phase * dec.Splus * src.Sminus - std::conj(phase) * src.Splus * dec.Sminus);
  const Matrix l_casc = phase * src.Sminus + dec.Sminus;
  return Superoperator(src.dim, lindblad_terms(drive + h_casc, l_casc, p.kappa), true);
}

Superoperator deform_qfi(const Superoperator& base, const Matrix& L, double dphi, double kappa) {
  const cplx c = kappa * (std::exp(-I * dphi) - 1.0);
  return base.with_terms({{c, L, L.adjoint()}}, dphi == 0.0);
}

Superoperator tilt_counting(const Superoperator& base, const Matrix& L, double s, double kappa) {
  const cplx c = kappa * std::expm1(-s);
  return base.with_terms({{c, L, L.adjoint()}}, s == 0.0);
}

Superoperator deform_homodyne(const Superoperator& base, const Matrix& Sminus, double s,
                              double phase_offset, double kappa) {
  const int d = base.dim();
  const Matrix id = Matrix::Identity(d, d);
  const double a = -s * std::sqrt(kappa);
  std::vector<SandwichTerm> extra{
      {a * std::exp(-I * phase_offset), Sminus, id},
      {a * std::exp(I * phase_offset), id, Sminus.adjoint()},
      {cplx(0.5 * s * s), id, id},
  };
  return base.with_terms(std::move(extra), s == 0.0);
}

}  // namespace btc
