#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

Spin spin(int N) {
  const int d = N + 1;
  const double S = 0.5 * N;
  Spin s;
  s.Sz = Matrix::Zero(d, d);
  s.Sp = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = S - k;
    s.Sz(k, k) = m;
    if (k > 0) s.Sp(k - 1, k) = std::sqrt(S * (S + 1) - m * (m + 1));
  }
  s.Sm = s.Sp.adjoint();
  s.Sx = 0.5 * (s.Sp + s.Sm);
  s.Sy = cplx(0, -0.5) * (s.Sp - s.Sm);
  return s;
}

Matrix embed_left(const Matrix& a, int db) {
  const int da = static_cast<int>(a.rows());
  Matrix out = Matrix::Zero(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < db; ++k) out(i * db + k, j * db + k) = a(i, j);
  return out;
}

Matrix embed_right(const Matrix& b, int da) {
  const int db = static_cast<int>(b.rows());
  Matrix out = Matrix::Zero(da * db, da * db);
  for (int k = 0; k < da; ++k)
    for (int i = 0; i < db; ++i)
      for (int j = 0; j < db; ++j) out(k * db + i, k * db + j) = b(i, j);
  return out;
}

Matrix dense_generator(int d, const std::vector<Term>& terms) {
  Matrix g = Matrix::Zero(d * d, d * d);
  for (const auto& t : terms)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        for (int p = 0; p < d; ++p) {
          if (t.A(m, p) == cplx(0)) continue;
          for (int q = 0; q < d; ++q) g(m * d + n, p * d + q) += t.c * t.A(m, p) * t.B(q, n);
        }
  return g;
}

std::vector<Term> lindblad(const Matrix& H, const Matrix& L, double rate) {
  const Matrix id = Matrix::Identity(H.rows(), H.cols());
  const Matrix LdL = L.adjoint() * L;
  return {{cplx(0, -1), H, id},
          {cplx(0, 1), id, H},
          {rate, L, L.adjoint()},
          {-0.5 * rate, LdL, id},
          {-0.5 * rate, id, LdL}};
}

Matrix btc(int N, double omega, double kappa) {
  const Spin s = spin(N);
  return dense_generator(N + 1, lindblad(omega * s.Sx, s.Sm, kappa));
}

Matrix cascaded_jump(int N, double dphi) {
  const Spin s = spin(N);
  const int d = N + 1;
  return std::exp(cplx(0, -dphi)) * embed_left(s.Sm, d) + embed_right(s.Sm, d);
}

Matrix cascaded(int N, double omega, double kappa, double dphi) {
  const Spin s = spin(N);
  const int d = N + 1;
  const Matrix sxS = embed_left(s.Sx, d), sxD = embed_right(s.Sx, d);
  const Matrix spS = embed_left(s.Sp, d), smS = embed_left(s.Sm, d);
  const Matrix spD = embed_right(s.Sp, d), smD = embed_right(s.Sm, d);
  const cplx e = std::exp(cplx(0, -dphi));
  const Matrix hc = cplx(0, -0.5 * kappa) * (e * spD * smS - std::conj(e) * spS * smD);
  const Matrix H = omega * (sxS + sxD) + hc;
  return dense_generator(d * d, lindblad(H, cascaded_jump(N, dphi), kappa));
}

std::vector<cplx> eigenvalues(const Matrix& g) {
  Eigen::ComplexEigenSolver<Matrix> es(g, false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

cplx dominant(const Matrix& g) {
  const auto ev = eigenvalues(g);
  return *std::max_element(ev.begin(), ev.end(),
                           [](cplx a, cplx b) { return a.real() < b.real(); });
}

Vector vec(const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  Vector v(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v(i * d + j) = m(i, j);
  return v;
}

Matrix unvec(const Vector& v, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

Matrix stationary(const Matrix& g, int d) {
  Eigen::ComplexEigenSolver<Matrix> es(g);
  Eigen::Index k0 = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&k0);
  Matrix rho = unvec(es.eigenvectors().col(k0), d);
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

cplx mode_sum_integral(const Matrix& g, int d, const Matrix& O, const Matrix& X) {
  Eigen::ComplexEigenSolver<Matrix> es(g);
  const Matrix R = es.eigenvectors();
  const Matrix Linv = R.inverse();  // rows are left eigenvectors
  Eigen::Index k0 = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&k0);
  const Vector x = vec(X);
  // Tr(O Y) = sum_{mn} O_{nm} Y_{mn} = vec(O^T) . vec(Y)
  const Vector o = vec(O.transpose());
  cplx total = 0.0;
  for (Eigen::Index k = 0; k < g.rows(); ++k) {
    if (k == k0) continue;
    const cplx ok = (o.transpose() * R.col(k))(0);
    const cplx lk = (Linv.row(k) * x)(0);
    total -= ok * lk / es.eigenvalues()(k);
  }
  (void)d;
  return total;
}

Vector expm_apply(const Matrix& g, const Vector& v, double t) {
  const Matrix e = (g * t).exp();
  return e * v;
}

double entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = std::max(es.eigenvalues()(i), 1e-14);
    s -= l * std::log(l);
  }
  return s;
}

}  // namespace oracle
