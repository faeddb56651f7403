#pragma once

#include <vector>

#include "ncdel/core.hpp"
#include "ncdel/linearize.hpp"
#include "ncdel/ncpoly.hpp"

namespace ncdel {

/// Roots of sum_k c[k] x^k through the companion matrix.
std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs);

/// Follows the root from z = E + iY (Y large, near -1/(z-1)) down to z by geometric steps in Im z,
/// always taking the root nearest to the previous one. `coeffs_at(z)` returns the polynomial in m.
template <typename CoeffFn>
cplx continued_root(CoeffFn coeffs_at, cplx z);

struct QuadraticFormOracle {
  cplx m1;
  CMatrix M_hat;  ///< (Xi^{-1} - m1)^{-1}
  CMatrix M;      ///< block diagonal diag(m1, M_hat)
};

/// Pencil K0 = diag(1, Xi^{-1}), K_g = E_{1,g+1} + E_{g+1,1} for q = x^t Xi x.
SymmetrizedLinearization quadratic_form_pencil(const CMatrix& Xi);
NCPolynomial quadratic_form_polynomial(const CMatrix& Xi);
QuadraticFormOracle oracle_quadratic_form(const CMatrix& Xi, cplx z);

struct ProductOracle {
  cplx m1;
  std::vector<cplx> m;  ///< m_1 ... m_{2 beta*}
  CMatrix M;
};

/// Pencil K0 = E_11 + sum_{j>=2} E_{j, 2b+2-j}, L_b = E_{b, 2b*+1-b} for q = y1..yb yb^*..y1^*.
Linearization product_pencil(int beta_star);
NCPolynomial product_polynomial(int beta_star);
ProductOracle oracle_product(int beta_star, cplx z);
/// Assembles m_1 ... m_{2 beta*} and M from a known root m1, e.g. the exact value at the spectral edge.
ProductOracle product_solution_from_root(int beta_star, cplx z, cplx m1);

/// Stability determinant of the product model as written in closed form in terms of w = zeta m1.
cplx product_stability_det_closed_form(int beta_star, cplx zeta_m1);
/// Edge where zeta m1 = (b+1)/b: returns z.
double product_edge(int beta_star);

/// M(z) for q = x1: the Im > 0 root of M^2 + (z-1)M + 1 = 0.
cplx semicircle_m(cplx z);

// ---------------------------------------------------------------------------

template <typename CoeffFn>
cplx continued_root(CoeffFn coeffs_at, cplx z) {
  const double E = z.real();
  const double Y = 1e3 * (1.0 + std::abs(E));
  const double eta_end = z.imag();
  cplx z0(E, Y);
  std::vector<cplx> roots = polynomial_roots(coeffs_at(z0));
  cplx guess = -1.0 / (z0 - 1.0);
  auto nearest = [](const std::vector<cplx>& rs, cplx g) {
    cplx best = rs.front();
    for (cplx r : rs)
      if (std::abs(r - g) < std::abs(best - g)) best = r;
    return best;
  };
  cplx cur = nearest(roots, guess);
  const int steps = 400;
  const double lo = std::max(eta_end, 1e-14);
  for (int k = 1; k <= steps; ++k) {
    double eta = std::exp(std::log(Y) + (std::log(lo) - std::log(Y)) * k / steps);
    if (k == steps) eta = eta_end;
    roots = polynomial_roots(coeffs_at(cplx(E, eta)));
    cur = nearest(roots, cur);
  }
  return cur;
}

}  // namespace ncdel
