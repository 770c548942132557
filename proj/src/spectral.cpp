#include "btcsense/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "btcsense/linalg.hpp"

namespace btc {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-8;

Vector start_vector(Eigen::Index n, int variant) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) + 1.0;
    v(i) = variant == 0 ? cplx(1.0 + 0.3 * std::sin(0.9 * x), 0.2 * std::cos(1.7 * x))
                        : cplx(0.5 + std::cos(2.3 * x), 0.4 * std::sin(0.31 * x));
  }
  return v.normalized();
}

void flag_degeneracy(SpectralResult& r, const std::vector<cplx>& others, double tol) {
  for (const cplx& z : others) {
    if (std::abs(z - r.eigenvalue) < tol) continue;  // same eigenvalue
    if (std::abs(z.real() - r.eigenvalue.real()) < tol) {
      r.degenerate = true;
      r.partner = z;
      return;
    }
  }
}

SpectralResult polish(const SparseMatrix& a, cplx sigma, const Vector& start,
                      const SpectralOptions& opts) {
  const linalg::SparseLU lu(linalg::shifted(a, sigma));
  int iters = 0;
  const auto p = linalg::inverse_iteration(a, lu, sigma, start, opts.tol, opts.max_iter, &iters);
  SpectralResult r;
  r.eigenvalue = p.value;
  r.right_vector = p.vector;
  r.residual = p.residual;
  r.iterations = iters;
  return r;
}

SpectralResult dominant_dense(const Superoperator& gen, const SpectralOptions& opts) {
  const Vector ev = linalg::dense_eigenvalues(gen.dense());
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < ev.size(); ++k) {
    const double dr = ev(k).real() - ev(best).real();
    if (dr > opts.degeneracy_tol ||
        (std::abs(dr) <= opts.degeneracy_tol &&
         std::abs(ev(k).imag()) > std::abs(ev(best).imag()) + opts.degeneracy_tol)) {
      best = k;
    }
  }
  const cplx lambda = ev(best);
  // Polish with inverse iteration just to the right of the dense estimate.
  const cplx sigma = lambda + 1e-7 * (1.0 + std::abs(lambda));
  SpectralResult r = polish(gen.matrix(), sigma, start_vector(gen.size(), 0), opts);
  std::vector<cplx> others(ev.data(), ev.data() + ev.size());
  others.erase(others.begin() + best);
  flag_degeneracy(r, others, opts.degeneracy_tol);
  return r;
}

SpectralResult dominant_propagation(const Superoperator& gen, const SpectralOptions& opts,
                                    Vector v) {
  if (v.size() != gen.size() || v.norm() == 0.0) v = start_vector(gen.size(), 0);
  v.normalize();
  SpectralResult r;
  r.residual = std::numeric_limits<double>::infinity();
  const double dt = 1.0;
  for (int it = 0; it < 20 * opts.max_iter; ++it) {
    v = linalg::expmv(gen.matrix(), v, dt, 1e-13);
    v.normalize();
    const Vector av = gen.apply(v);
    const cplx lambda = v.dot(av);
    const double res = (av - lambda * v).norm();
    r.iterations = it + 1;
    if (res < r.residual) {
      r.eigenvalue = lambda;
      r.right_vector = v;
      r.residual = res;
    }
    if (res < opts.tol) break;
  }
  return r;
}

SpectralResult dominant_shift_invert(const Superoperator& gen, const SpectralOptions& opts) {
  const cplx sigma = opts.hint.value_or(cplx(0.0)) + opts.shift_offset;
  const SparseMatrix& a = gen.matrix();
  const linalg::SparseLU lu(linalg::shifted(a, sigma));
  linalg::ArnoldiOptions ao;
  ao.tol = std::max(opts.tol * 1e-2, 1e-12);
  ao.nev = 8;
  int iters = 0;
  const auto pairs =
      linalg::shift_invert_arnoldi(a, lu, sigma, start_vector(a.rows(), 0), ao, &iters);

  const linalg::RitzPair* best = nullptr;
  for (const auto& p : pairs) {
    if (p.residual < 1e-4 * (1.0 + std::abs(p.value))) {
      if (!best || p.value.real() > best->value.real()) best = &p;
    }
  }
  SpectralResult r;
  if (best) {
    const auto pol =
        linalg::inverse_iteration(a, lu, sigma, best->vector, opts.tol, opts.max_iter, &iters);
    r.eigenvalue = pol.value;
    r.right_vector = pol.vector;
    r.residual = pol.residual;
    r.iterations = iters;
    std::vector<cplx> others;
    for (const auto& p : pairs) {
      if (&p != best && p.residual < 1e-6 * (1.0 + std::abs(p.value))) others.push_back(p.value);
    }
    flag_degeneracy(r, others, opts.degeneracy_tol);
  }
  if (!best || r.residual > opts.tol) {
    auto fallback = dominant_propagation(gen, opts, best ? best->vector : Vector());
    if (!best || fallback.residual < r.residual) r = fallback;
  }
  return r;
}

}  // namespace

DensityMatrix::DensityMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols() || data_.rows() == 0) {
    throw std::invalid_argument("DensityMatrix: must be square and non-empty");
  }
  const double scale = std::max(1.0, data_.norm());
  if ((data_ - data_.adjoint()).norm() > kHermitianTol * scale) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(data_.trace() - 1.0) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace differs from 1");
  }
  if (eigenvalues().minCoeff() < -kPsdTol) {
    throw std::invalid_argument("DensityMatrix: not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::normalized(const Matrix& raw) {
  Matrix h = 0.5 * (raw + raw.adjoint());
  const cplx tr = h.trace();
  if (std::abs(tr) == 0.0) throw std::invalid_argument("DensityMatrix: zero trace");
  h /= tr.real();
  return DensityMatrix(std::move(h));
}

double DensityMatrix::purity() const { return (data_ * data_).trace().real(); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (data_ + data_.adjoint()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

cplx vec_trace(const Vector& v, int dim) {
  cplx tr = 0.0;
  for (int m = 0; m < dim; ++m) tr += v(static_cast<Eigen::Index>(m) * dim + m);
  return tr;
}

SpectralResult dominant_eigenvalue(const Superoperator& gen, const SpectralOptions& opts) {
  EigenMethod method = opts.method;
  if (method == EigenMethod::Auto) {
    method = gen.size() <= opts.dense_limit ? EigenMethod::Dense : EigenMethod::ShiftInvert;
  }
  SpectralResult r;
  switch (method) {
    case EigenMethod::Dense: r = dominant_dense(gen, opts); break;
    case EigenMethod::Propagation: r = dominant_propagation(gen, opts, Vector()); break;
    default: r = dominant_shift_invert(gen, opts); break;
  }
  if (!(r.residual <= opts.tol)) {
    throw NumericalError(ErrorKind::NonConvergence,
                         "dominant eigenvalue residual " + std::to_string(r.residual) +
                             " above tolerance");
  }
  return r;
}

DensityMatrix steady_state(const Superoperator& gen, const SpectralOptions& opts) {
  if (!gen.trace_preserving()) {
    throw std::invalid_argument("steady_state: generator is not trace preserving");
  }
  const SparseMatrix& a = gen.matrix();
  const cplx sigma = 1e-6;
  const linalg::SparseLU lu(linalg::shifted(a, sigma));

  // Two independent starts: a unique null space maps both onto the same state.
  std::array<Matrix, 2> states;
  for (int k = 0; k < 2; ++k) {
    const auto p = linalg::inverse_iteration(a, lu, sigma, start_vector(a.rows(), k), 1e-13,
                                             opts.max_iter);
    const Matrix raw = unvec(p.vector, gen.dim());
    const cplx tr = raw.trace();
    if (std::abs(tr) < 1e-12) {
      throw NumericalError(ErrorKind::NonConvergence, "steady_state: traceless null vector");
    }
    states[k] = raw / tr;
  }
  if ((states[0] - states[1]).norm() > 1e-6) {
    throw NumericalError(ErrorKind::NonConvergence,
                         "steady_state: zero eigenvalue is degenerate");
  }
  DensityMatrix rho = DensityMatrix::normalized(states[0]);
  const double res = gen.apply(rho.vec()).norm();
  if (res > opts.tol * std::max(1.0, rho.data().norm())) {
    throw NumericalError(ErrorKind::NonConvergence,
                         "steady_state: residual " + std::to_string(res) + " above tolerance");
  }
  return rho;
}

Matrix propagate_operator(const Superoperator& gen, const Matrix& x, double t, double tol) {
  if (t < 0.0) throw std::invalid_argument("propagate: t must be >= 0");
  return unvec(linalg::expmv(gen.matrix(), vec(x), t, tol), gen.dim());
}

DensityMatrix propagate(const Superoperator& gen, const DensityMatrix& rho0, double t,
                        double tol) {
  if (!gen.trace_preserving()) {
    throw std::invalid_argument("propagate: generator is not trace preserving");
  }
  return DensityMatrix::normalized(propagate_operator(gen, rho0.data(), t, tol));
}

std::vector<cplx> two_time_correlation(const Superoperator& gen, const Matrix& L,
                                       const DensityMatrix& rho_ss,
                                       const std::vector<double>& taus) {
  std::vector<std::size_t> order(taus.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return taus[i] < taus[j]; });

  const Matrix obs = L.adjoint() * L;
  Vector x = vec(L * rho_ss.data() * L.adjoint());
  double t_now = 0.0;
  std::vector<cplx> out(taus.size());
  for (const auto idx : order) {
    const double tau = taus[idx];
    if (tau < 0.0) throw std::invalid_argument("two_time_correlation: tau must be >= 0");
    if (tau > t_now) {
      x = linalg::expmv(gen.matrix(), x, tau - t_now, 1e-13);
      t_now = tau;
    }
    out[idx] = (obs * unvec(x, gen.dim())).trace();
  }
  return out;
}

namespace {

cplx integral_linear_solve(const Superoperator& gen, const DensityMatrix& rho_ss,
                           const Matrix& observable, const Matrix& x) {
  const int d = gen.dim();
  const Eigen::Index n = gen.size();
  const Vector r = rho_ss.vec();
  const Vector y = vec(x) - x.trace() * r;

  // [[G, r], [tr, 0]] [z; mu] = [y; 0]
  std::vector<Eigen::Triplet<cplx, long>> trips;
  trips.reserve(gen.matrix().nonZeros() + 2 * n);
  const SparseMatrix& g = gen.matrix();
  for (Eigen::Index j = 0; j < g.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(g, j); it; ++it) {
      trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(r(i)) > 0.0) trips.emplace_back(i, n, r(i));
  }
  for (int m = 0; m < d; ++m) trips.emplace_back(n, static_cast<Eigen::Index>(m) * d + m, 1.0);
  SparseMatrix aug(n + 1, n + 1);
  aug.setFromTriplets(trips.begin(), trips.end());
  aug.makeCompressed();

  Vector rhs = Vector::Zero(n + 1);
  rhs.head(n) = y;
  const linalg::SparseLU lu(aug);
  const Vector sol = lu.solve(rhs);
  const Matrix z = unvec(sol.head(n), d);
  return -(observable * z).trace();
}

// 10-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 10> kGlNodes = {
    0.013046735741414128, 0.067468316655507732, 0.16029521585048778, 0.28330230293537639,
    0.42556283050918442,  0.57443716949081558,  0.71669769706462361, 0.83970478414951222,
    0.93253168334449232,  0.98695326425858587};
constexpr std::array<double, 10> kGlWeights = {
    0.033335672154344069, 0.074725674575290293, 0.10954318125799102, 0.13463335965499818,
    0.14776211235737644,  0.14776211235737644,  0.13463335965499818, 0.10954318125799102,
    0.074725674575290293, 0.033335672154344069};

cplx integral_quadrature(const Superoperator& gen, const DensityMatrix& rho_ss,
                         const Matrix& observable, const Matrix& x) {
  const int d = gen.dim();
  // X - Tr(X) rho_ss has zero trace, so it has no stationary component and
  // decays to exactly zero even when rho_ss carries solver error.
  auto connected = [&](const Vector& v) { return (observable * unvec(v, d)).trace(); };

  Vector state = vec(x) - x.trace() * vec(rho_ss.data());
  const double c0 = std::abs(connected(state));
  if (c0 == 0.0) return 0.0;
  const double floor = std::max(1e-10 * c0, 1e-14 * observable.norm() * x.norm());
  const double width = std::min(0.25, 2.0 / std::max(1.0, linalg::norm1(gen.matrix())) * 10.0);
  cplx total = 0.0;
  double t0 = 0.0;
  int quiet_panels = 0;
  while (quiet_panels < 40 && t0 < 1e4) {
    double t_prev = t0;
    cplx panel = 0.0;
    double panel_max = 0.0;
    Vector v = state;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k) {
      const double tk = t0 + width * kGlNodes[k];
      v = linalg::expmv(gen.matrix(), v, tk - t_prev, 1e-13);
      t_prev = tk;
      const cplx c = connected(v);
      panel += kGlWeights[k] * c;
      panel_max = std::max(panel_max, std::abs(c));
    }
    total += width * panel;
    state = linalg::expmv(gen.matrix(), v, t0 + width - t_prev, 1e-13);
    t0 += width;
    quiet_panels = panel_max < floor ? quiet_panels + 1 : 0;
  }
  if (t0 >= 1e4) {
    throw NumericalError(ErrorKind::NonConvergence,
                         "correlation quadrature did not reach the exponential tail");
  }
  return total;
}

}  // namespace

cplx connected_correlation_integral(const Superoperator& gen, const DensityMatrix& rho_ss,
                                   const Matrix& observable, const Matrix& x,
                                   IntegralMethod method) {
  if (!gen.trace_preserving()) {
    throw std::invalid_argument("connected_correlation_integral: generator not trace preserving");
  }
  return method == IntegralMethod::LinearSolve
             ? integral_linear_solve(gen, rho_ss, observable, x)
             : integral_quadrature(gen, rho_ss, observable, x);
}

namespace {

DerivativeEstimate richardson(double coarse, double fine) {
  DerivativeEstimate d;
  d.value = (4.0 * fine - coarse) / 3.0;
  d.error = std::abs(d.value - fine);
  const double scale = std::max(std::abs(fine), 1e-12);
  d.nonsmooth = std::abs(coarse - fine) > 0.01 * scale;
  return d;
}

}  // namespace

DerivativeEstimate derivative_at(const std::function<double(double)>& f, double x0, double h,
                                 int order) {
  if (!(h > 0.0)) throw std::invalid_argument("derivative_at: h must be > 0");
  if (order != 1 && order != 2) throw std::invalid_argument("derivative_at: order must be 1 or 2");
  auto central = [&](double step, double f0) {
    const double fp = f(x0 + step);
    const double fm = f(x0 - step);
    return order == 1 ? (fp - fm) / (2.0 * step) : (fp - 2.0 * f0 + fm) / (step * step);
  };
  const double f0 = order == 2 ? f(x0) : 0.0;
  return richardson(central(h, f0), central(0.5 * h, f0));
}

DerivativeEstimate mixed_derivative_at_zero(const std::function<double(double)>& f, double h) {
  return derivative_at(f, 0.0, h, 2);
}

DerivativeEstimate mixed_derivative_at(const std::function<double(double, double)>& f, double x0,
                                       double y0, double hx, double hy) {
  if (!(hx > 0.0) || !(hy > 0.0)) {
    throw std::invalid_argument("mixed_derivative_at: steps must be > 0");
  }
  auto central = [&](double a, double b) {
    return (f(x0 + a, y0 + b) - f(x0 + a, y0 - b) - f(x0 - a, y0 + b) + f(x0 - a, y0 - b)) /
           (4.0 * a * b);
  };
  return richardson(central(hx, hy), central(0.5 * hx, 0.5 * hy));
}

}  // namespace btc
