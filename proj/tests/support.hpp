#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ncdel/core.hpp"
#include "ncdel/ncpoly.hpp"

namespace ncdel::testing {

/// Random self-adjoint q = r + r^* with q(0) = 0. Each of the `terms` monomials of r has a random
/// length in [1, max_deg] over the full alphabet and a coefficient of modulus in [lo, hi].
inline NCPolynomial random_self_adjoint(std::mt19937_64& rng, int alpha, int beta, int max_deg, int terms,
                                        double lo = 0.2, double hi = 1.0) {
  std::uniform_int_distribution<int> len(1, max_deg);
  std::uniform_int_distribution<int> letter(0, alpha + 2 * beta - 1);
  std::uniform_real_distribution<double> mod(lo, hi), phase(0.0, 2.0 * M_PI);
  NCPolynomial r(alpha, beta);
  for (int t = 0; t < terms; ++t) {
    Word w;
    int k = len(rng);
    for (int i = 0; i < k; ++i) {
      int l = letter(rng);
      if (l < alpha)
        w.push_back(Symbol::x(l + 1));
      else if (l < alpha + beta)
        w.push_back(Symbol::y(l - alpha + 1));
      else
        w.push_back(Symbol::ystar(l - alpha - beta + 1));
    }
    r = r + NCPolynomial::monomial(w, std::polar(mod(rng), phase(rng)), alpha, beta);
  }
  return r + adjoint(r);
}

/// Random hermitian invertible Xi with eigenvalues of modulus in [0.5, 2] and random signs.
inline CMatrix random_invertible_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CMatrix A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(A);
  CMatrix Q = qr.householderQ();
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::bernoulli_distribution sign(0.5);
  RVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  CMatrix Xi = Q * d.cast<cplx>().asDiagonal() * Q.adjoint();
  return (Xi + Xi.adjoint()) * 0.5;
}

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  CMatrix A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng));
  return A;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  CMatrix A = random_matrix(rng, n);
  return (A + A.adjoint()) * 0.5;
}

}  // namespace ncdel::testing
