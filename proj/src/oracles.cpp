#include "ncdel/oracles.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace ncdel {

namespace {

/// Multiplies two coefficient lists (lowest degree first).
std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

void poly_add(std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

std::vector<double> xi_eigenvalues(const CMatrix& Xi) {
  if (Xi.rows() != Xi.cols() || Xi.rows() == 0) throw DomainError("Xi must be square and nonempty");
  if (hermitian_defect(Xi) > 1e-12 * (1.0 + Xi.cwiseAbs().maxCoeff())) throw DomainError("Xi must be hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(Xi, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) <= 1e-12 * scale || scale == 0.0) throw DomainError("Xi is singular");
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs) {
  std::vector<cplx> c = coeffs;
  while (!c.empty() && c.back() == cplx(0.0)) c.pop_back();
  if (c.size() < 2) return {};
  const Eigen::Index n = static_cast<Eigen::Index>(c.size()) - 1;
  CMatrix comp = CMatrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
  Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

cplx semicircle_m(cplx z) {
  // m^2 + (z - 1) m + 1 = 0
  cplx b = z - 1.0;
  cplx s = std::sqrt(b * b - 4.0);
  cplx r1 = (-b + s) / 2.0, r2 = (-b - s) / 2.0;
  return r1.imag() > r2.imag() ? r1 : r2;
}

SymmetrizedLinearization quadratic_form_pencil(const CMatrix& Xi) {
  xi_eigenvalues(Xi);
  const Eigen::Index g = Xi.rows();
  SymmetrizedLinearization S;
  S.K0 = CMatrix::Zero(g + 1, g + 1);
  S.K0(0, 0) = 1.0;
  CMatrix inv = Xi.inverse();
  S.K0.bottomRightCorner(g, g) = (inv + inv.adjoint()) * 0.5;
  for (Eigen::Index k = 0; k < g; ++k) {
    CMatrix K = CMatrix::Zero(g + 1, g + 1);
    K(0, k + 1) = 1.0;
    K(k + 1, 0) = 1.0;
    S.K.push_back(K);
  }
  return S;
}

NCPolynomial quadratic_form_polynomial(const CMatrix& Xi) {
  const int g = static_cast<int>(Xi.rows());
  NCPolynomial q(g, 0);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) q.add_term({Symbol::x(i + 1), Symbol::x(j + 1)}, Xi(i, j));
  return q;
}

QuadraticFormOracle oracle_quadratic_form(const CMatrix& Xi, cplx z) {
  std::vector<double> xi = xi_eigenvalues(Xi);
  // (1 + (z-1) m) prod_g (a_g - m) + sum_g m prod_{d != g} (a_d - m) = 0, a_g = 1/xi_g.
  auto coeffs = [&](cplx zz) {
    std::vector<cplx> head{1.0, zz - 1.0};
    std::vector<cplx> all{1.0};
    for (double x : xi) all = poly_mul(all, {1.0 / x, -1.0});
    std::vector<cplx> p = poly_mul(head, all);
    for (std::size_t g = 0; g < xi.size(); ++g) {
      std::vector<cplx> t{0.0, 1.0};
      for (std::size_t d = 0; d < xi.size(); ++d)
        if (d != g) t = poly_mul(t, {1.0 / xi[d], -1.0});
      poly_add(p, t);
    }
    return p;
  };
  QuadraticFormOracle out;
  out.m1 = continued_root(coeffs, z);
  const Eigen::Index g = Xi.rows();
  CMatrix A = Xi.inverse();
  A.diagonal().array() -= out.m1;
  out.M_hat = A.inverse();
  out.M = CMatrix::Zero(g + 1, g + 1);
  out.M(0, 0) = out.m1;
  out.M.bottomRightCorner(g, g) = out.M_hat;
  return out;
}

Linearization product_pencil(int b) {
  if (b < 1) throw DomainError("product model needs beta* >= 1");
  const int n = 2 * b;
  Linearization L;
  L.K0 = CMatrix::Zero(n, n);
  L.K0(0, 0) = 1.0;
  for (int j = 2; j <= n; ++j) L.K0(j - 1, n + 2 - j - 1) = 1.0;
  for (int beta = 1; beta <= b; ++beta) {
    CMatrix Lb = CMatrix::Zero(n, n);
    Lb(beta - 1, n + 1 - beta - 1) = 1.0;
    L.L.push_back(Lb);
  }
  return L;
}

NCPolynomial product_polynomial(int b) {
  Word w;
  for (int i = 1; i <= b; ++i) w.push_back(Symbol::y(i));
  for (int i = b; i >= 1; --i) w.push_back(Symbol::ystar(i));
  return NCPolynomial::monomial(w, 1.0, 0, b);
}

ProductOracle product_solution_from_root(int b, cplx z, cplx m1) {
  if (b < 1) throw DomainError("product model needs beta* >= 1");
  ProductOracle out;
  out.m1 = m1;
  const cplx zeta = 1.0 - z;
  const cplx w = zeta * m1;
  const int n = 2 * b;
  out.m.assign(n, 0.0);
  for (int beta = 1; beta <= b; ++beta) out.m[beta - 1] = std::pow(zeta, beta - 1) * std::pow(m1, beta);
  out.m[b] = w;
  for (int beta = 1; beta <= b - 1; ++beta) out.m[b + beta] = std::pow(w, beta + 1);
  out.M = CMatrix::Zero(n, n);
  for (int j = 1; j <= n; ++j) out.M(j - 1, j - 1) = out.m[j - 1];
  for (int j = 2; j <= n; ++j) out.M(j - 1, n + 2 - j - 1) += out.m[b];
  out.M(b, b) -= out.m[b];
  return out;
}

ProductOracle oracle_product(int b, cplx z) {
  if (b < 1) throw DomainError("product model needs beta* >= 1");
  // 1 - zeta m + zeta^b m^{b+1} = 0
  auto coeffs = [b](cplx zz) {
    cplx zeta = 1.0 - zz;
    std::vector<cplx> c(b + 2, 0.0);
    c[0] = 1.0;
    c[1] += -zeta;
    c[b + 1] += std::pow(zeta, b);
    return c;
  };
  cplx m1 = continued_root(coeffs, z);
  std::vector<cplx> roots = polynomial_roots(coeffs(z));
  int upper = 0;
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (roots[i].imag() > 1e-12 && roots[j].imag() > 1e-12 && std::abs(roots[i].imag() - roots[j].imag()) < 1e-12)
        ++upper;
  if (upper > 0) throw NumericalError("root selection ambiguous: two roots share the imaginary part");
  return product_solution_from_root(b, z, m1);
}

cplx product_stability_det_closed_form(int b, cplx w) {
  return double(b + 1) * std::pow(-w, b) + w * w * double(b) * std::pow(-w, b - 1);
}

double product_edge(int b) {
  return 1.0 - std::pow(double(b + 1), b + 1) / std::pow(double(b), b);
}

}  // namespace ncdel
