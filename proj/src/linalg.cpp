#include "btcsense/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/UmfPackSupport>
#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace btc::linalg {

using IntSparse = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

struct SparseLU::Impl {
  IntSparse matrix;
  Eigen::UmfPackLU<IntSparse> lu;
};

SparseLU::SparseLU(const SparseMatrix& a) : impl_(std::make_unique<Impl>()), n_(a.rows()) {
  impl_->matrix = a;
  impl_->matrix.makeCompressed();
  impl_->lu.compute(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) {
    throw NumericalError(ErrorKind::NonConvergence, "sparse LU factorization failed");
  }
}

SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

Vector SparseLU::solve(const Vector& b) const {
  Vector x = impl_->lu.solve(b);
  return x;
}

SparseMatrix shifted(const SparseMatrix& a, cplx sigma) {
  SparseMatrix id(a.rows(), a.cols());
  id.setIdentity();
  SparseMatrix out = a - sigma * id;
  out.makeCompressed();
  return out;
}

Vector dense_eigenvalues(Matrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Vector w(n);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
      reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw NumericalError(ErrorKind::NonConvergence,
                         "zgeev failed with info=" + std::to_string(info));
  }
  return w;
}

namespace {

double residual_of(const SparseMatrix& a, const Vector& v, cplx lambda) {
  return (a * v - lambda * v).norm() / v.norm();
}

Vector default_start(Eigen::Index n) {
  // Deterministic, generic start vector.
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
  }
  return v.normalized();
}

}  // namespace

RitzPair inverse_iteration(const SparseMatrix& a, const SparseLU& lu, cplx sigma, Vector v,
                           double tol, int max_iter, int* iterations) {
  if (v.size() == 0 || v.norm() == 0.0) v = default_start(a.rows());
  v.normalize();
  RitzPair best{cplx(0.0), v, std::numeric_limits<double>::infinity()};
  int stagnant = 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    Vector w = lu.solve(v);
    const double wn = w.norm();
    if (!std::isfinite(wn) || wn == 0.0) break;
    v = w / wn;
    const Vector av = a * v;
    const cplx lambda = v.dot(av);  // v unit norm; dot conjugates the first argument
    const double r = (av - lambda * v).norm();
    const bool improved = r < 0.5 * best.residual;
    if (r < best.residual) best = {lambda, v, r};
    stagnant = improved ? 0 : stagnant + 1;
    // Keep iterating while the residual still drops: the finite-difference
    // stencils downstream want the floor, not just the tolerance.
    if (best.residual < tol && !improved) break;
    if (stagnant >= 4) break;
  }
  if (iterations) *iterations += it;
  (void)sigma;
  return best;
}

std::vector<RitzPair> shift_invert_arnoldi(const SparseMatrix& a, const SparseLU& lu, cplx sigma,
                                           const Vector& start, const ArnoldiOptions& opts,
                                           int* iterations) {
  const Eigen::Index n = a.rows();
  const int m = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, n));
  Vector v0 = (start.size() == n && start.norm() > 0.0) ? Vector(start.normalized())
                                                          : default_start(n);
  std::vector<RitzPair> pairs;
  int total = 0;

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    Matrix V = Matrix::Zero(n, m + 1);
    Matrix H = Matrix::Zero(m + 1, m);
    V.col(0) = v0;
    int used = m;
    for (int j = 0; j < m; ++j) {
      Vector w = lu.solve(V.col(j));
      ++total;
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const cplx h = V.col(i).dot(w);
          H(i, j) += h;
          w -= h * V.col(i);
        }
      }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      if (hn < 1e-14 * std::abs(H(j, j)) || hn == 0.0) {
        used = j + 1;
        break;
      }
      V.col(j + 1) = w / hn;
    }

    Eigen::ComplexEigenSolver<Matrix> es(H.topLeftCorner(used, used));
    pairs.clear();
    for (int k = 0; k < used; ++k) {
      const cplx theta = es.eigenvalues()(k);
      if (std::abs(theta) == 0.0) continue;
      Vector y = V.leftCols(used) * es.eigenvectors().col(k);
      y.normalize();
      const cplx lambda = sigma + 1.0 / theta;
      pairs.push_back({lambda, y, residual_of(a, y, lambda)});
    }

    // Pick the target: largest real part among reasonably converged pairs,
    // else the pair nearest the shift.
    const RitzPair* target = nullptr;
    for (const auto& p : pairs) {
      if (p.residual < 1e-4 * (1.0 + std::abs(p.value))) {
        if (!target || p.value.real() > target->value.real()) target = &p;
      }
    }
    if (!target) {
      for (const auto& p : pairs) {
        if (!target || std::abs(p.value - sigma) < std::abs(target->value - sigma)) target = &p;
      }
    }
    if (!target) break;
    if (target->residual < opts.tol) break;
    v0 = target->vector;
  }

  if (iterations) *iterations += total;
  std::sort(pairs.begin(), pairs.end(),
            [](const RitzPair& x, const RitzPair& y) { return x.value.real() > y.value.real(); });
  if (static_cast<int>(pairs.size()) > opts.nev) pairs.resize(opts.nev);
  return pairs;
}

double norm1(const SparseMatrix& a) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

Vector expmv(const SparseMatrix& a, const Vector& v, double t, double tol, int krylov_dim) {
  if (t < 0.0) throw std::invalid_argument("expmv: t must be >= 0");
  Vector w = v;
  if (t == 0.0 || v.norm() == 0.0) return w;
  const Eigen::Index n = a.rows();
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, n));
  const double anorm = std::max(norm1(a), 1e-300);
  double t_now = 0.0;
  double tau = std::min(t, 0.5 * m / anorm * 4.0);
  const double min_tau = 1e-14 * t;

  while (t_now < t) {
    const double beta = w.norm();
    if (beta == 0.0) return w;
    Matrix V = Matrix::Zero(n, m + 1);
    Matrix H = Matrix::Zero(m + 1, m);
    V.col(0) = w / beta;
    int used = m;
    bool happy = false;
    for (int j = 0; j < m; ++j) {
      Vector z = a * V.col(j);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const cplx h = V.col(i).dot(z);
          H(i, j) += h;
          z -= h * V.col(i);
        }
      }
      const double hn = z.norm();
      H(j + 1, j) = hn;
      if (hn < 1e-13 * anorm) {
        used = j + 1;
        happy = true;
        break;
      }
      V.col(j + 1) = z / hn;
    }

    while (true) {
      const double step = std::min(tau, t - t_now);
      const Matrix E = (step * H.topLeftCorner(used, used)).exp();
      const double err =
          happy ? 0.0 : beta * std::abs(H(used, used - 1)) * std::abs(E(used - 1, 0));
      if (err <= tol * beta * step / t || happy) {
        w = beta * (V.leftCols(used) * E.col(0));
        t_now += step;
        if (err < 0.1 * tol * beta * step / t) tau = step * 1.5;
        break;
      }
      tau = 0.5 * step;
      if (tau < min_tau) {
        throw NumericalError(ErrorKind::StepSizeFailure, "expmv: step size underflow");
      }
    }
  }
  return w;
}

}  // namespace btc::linalg
