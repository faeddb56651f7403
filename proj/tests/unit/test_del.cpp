#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "ncdel/del.hpp"
#include "ncdel/oracles.hpp"
#include "../support.hpp"

using namespace ncdel;

namespace {

Linearization semicircle_pencil() { return as_linearization(standard_linearization(parse_poly("x1", 1, 0))); }

Linearization anticommutator_pencil() {
  return as_linearization(minimal_linearization(standard_linearization(parse_poly("x1*x2+x2*x1", 2, 0))));
}

Linearization zero_pencil() {
  Linearization L;
  L.K0 = CMatrix::Identity(1, 1);
  return L;
}

/// M = ((1 - z) - sqrt((z - 1)^2 - 4)) / 2 on the branch with Im M > 0.
cplx quadratic_formula(cplx z) {
  cplx r = std::sqrt((z - 1.0) * (z - 1.0) - 4.0);
  cplx a = ((1.0 - z) - r) / 2.0, b = ((1.0 - z) + r) / 2.0;
  return a.imag() > b.imag() ? a : b;
}

CMatrix random_psd(std::mt19937_64& rng, Eigen::Index m) {
  CMatrix A = testing::random_matrix(rng, m);
  return A * A.adjoint();
}

}  // namespace

TEST_CASE("superoperator: zero, scalar, and the symmetrized form") {
  Linearization s = semicircle_pencil();
  CHECK(apply_superop(s, CMatrix::Zero(1, 1)).norm() == 0.0);
  CMatrix r(1, 1);
  r(0, 0) = cplx(0.3, -0.2);
  CHECK(std::abs(apply_superop(s, r)(0, 0) - r(0, 0)) < 1e-15);

  CMatrix Xi(2, 2);
  Xi << 0.0, 1.0, 1.0, 0.0;
  Linearization q = as_linearization(quadratic_form_pencil(Xi));
  CMatrix I3 = CMatrix::Identity(3, 3), direct = CMatrix::Zero(3, 3);
  for (const auto& K : q.K) direct += K * I3 * K;
  CHECK((apply_superop(q, I3) - direct).norm() < 1e-14);

  Linearization p = product_pencil(2);
  std::mt19937_64 rng(2);
  CMatrix R = random_psd(rng, 4);
  CMatrix viaL = apply_superop(p, R), viaK = apply_superop(hermitian_coefficients(p), R);
  CHECK((viaL - viaK).norm() < 1e-13);
  CHECK(min_hermitian_eigenvalue((viaL + viaL.adjoint()) * 0.5) > -1e-12);
}

TEST_CASE("solve_del: semicircle quadratic formula") {
  Linearization L = semicircle_pencil();
  DELSolution s = solve_del(L, cplx(0.0, 1.0));
  CHECK(std::abs(s.M(0, 0) - cplx(0.2570658, 0.5290860)) < 1e-6);
  for (cplx z : {cplx(1.0, 1e-3), cplx(-0.5, 0.1), cplx(4.0, 0.01), cplx(2.9, 2.0)}) {
    DELSolution t = solve_del(L, z);
    CHECK(std::abs(t.M(0, 0) - quadratic_formula(z)) < 1e-10);
    CHECK(t.residual_norm <= 1e-11);
  }
}

TEST_CASE("solve_del: q = 0 gives 1/(1 - z)") {
  for (cplx z : {cplx(0.0, 1.0), cplx(3.0, 0.5), cplx(-2.0, 1e-4)}) {
    DELSolution s = solve_del(zero_pencil(), z);
    CHECK(std::abs(s.M(0, 0) - 1.0 / (1.0 - z)) < 1e-13);
  }
}

TEST_CASE("solve_del: product model beta* = 1 at z = -1") {
  DELSolution s = solve_del(product_pencil(1), cplx(-1.0, 1e-9));
  CHECK(std::abs(s.M(0, 0) - cplx(0.5, 0.5)) < 1e-7);
  ProductOracle o = oracle_product(1, cplx(-1.0, 0.0));
  CHECK(std::abs(o.m1 - cplx(0.5, 0.5)) < 1e-12);
  CHECK(std::abs(o.m[1] - cplx(1.0, 1.0)) < 1e-12);
}

TEST_CASE("solve_del: invariants on the anticommutator") {
  Linearization L = anticommutator_pencil();
  for (double E : {-3.0, -1.0, 0.5, 1.0, 2.0, 5.0})
    for (double eta : {1e-4, 1e-2, 1.0}) {
      DELSolution s = solve_del(L, cplx(E, eta));
      CHECK(del_residual(L, s.z, s.M) <= 1e-11);
      CHECK(min_hermitian_eigenvalue(imag_part(s.M)) >= -1e-10);
      CHECK(s.M(0, 0).imag() > 0.0);
    }
  CHECK_THROWS_AS(solve_del(L, cplx(0.0, 0.0)), DomainError);
}

TEST_CASE("solve_del: quadratic form oracle gives the full M") {
  std::mt19937_64 rng(31);
  CMatrix Xi = testing::random_invertible_hermitian(rng, 3);
  Linearization L = as_linearization(quadratic_form_pencil(Xi));
  for (cplx z : {cplx(0.3, 0.05), cplx(1.5, 0.2), cplx(-2.0, 1.0)}) {
    QuadraticFormOracle o = oracle_quadratic_form(Xi, z);
    DELSolution s = solve_del(L, z);
    CHECK((s.M - o.M).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(s.M.block(0, 1, 1, 3).cwiseAbs().maxCoeff() < 1e-9);
  }
  CMatrix sing = CMatrix::Identity(2, 2);
  sing(1, 1) = 0.0;
  CHECK_THROWS_AS(oracle_quadratic_form(sing, cplx(0.0, 1.0)), DomainError);
}

TEST_CASE("quadratic form with Xi = 1 is the pushforward of the semicircle under x^2") {
  CMatrix Xi = CMatrix::Identity(1, 1);
  /// p = 1 - s^2: the density at E is rho_sc(sqrt(1-E)) / sqrt(1-E) for E in (-3, 1).
  for (double E : {-2.0, -0.5, 0.5}) {
    QuadraticFormOracle o = oracle_quadratic_form(Xi, cplx(E, 1e-10));
    double t = std::sqrt(1.0 - E);
    double expect = std::sqrt(4.0 - t * t) / (2.0 * M_PI) / t;
    CHECK(std::abs(o.m1.imag() / M_PI - expect) < 1e-6);
  }
}

TEST_CASE("solve_del: product oracle, all entries") {
  for (int b = 1; b <= 3; ++b) {
    Linearization L = product_pencil(b);
    for (cplx z : {cplx(-1.0, 0.05), cplx(0.5, 0.3), cplx(-3.0, 1.0)}) {
      ProductOracle o = oracle_product(b, z);
      DELSolution s = solve_del(L, z);
      CHECK((s.M - o.M).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("warm starts and curves agree with cold solves") {
  Linearization L = anticommutator_pencil();
  DELSolution a = solve_del(L, cplx(0.4, 0.01));
  DELSolution b = solve_del_warm(L, cplx(0.45, 0.01), a.M);
  DELSolution c = solve_del(L, cplx(0.45, 0.01));
  CHECK((b.M - c.M).norm() < 1e-10);
  std::vector<double> grid = linear_grid(-2.0, 3.0, 41);
  auto fwd = solve_curve(L, grid, 1e-3);
  std::vector<double> rev(grid.rbegin(), grid.rend());
  auto bwd = solve_curve(L, rev, 1e-3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(fwd[i].z.real() == grid[i]);
    CHECK((fwd[i].M - bwd[grid.size() - 1 - i].M).norm() < 1e-9);
  }
  auto single = solve_curve(L, {0.7}, 0.1);
  CHECK((single[0].M - solve_del(L, cplx(0.7, 0.1)).M).norm() < 1e-10);
}

TEST_CASE("solve_curve traces the semicircle") {
  Linearization L = semicircle_pencil();
  std::vector<double> grid = linear_grid(-1.5, 3.5, 51);
  auto sols = solve_curve(L, grid, 1e-4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = grid[i] - 1.0;
    double expect = x * x < 4.0 ? std::sqrt(4.0 - x * x) / (2.0 * M_PI) : 0.0;
    CHECK(std::abs(sols[i].M(0, 0).imag() / M_PI - expect) < 5e-3);
  }
}

TEST_CASE("density of states anchors") {
  CHECK(std::abs(density_of_states(semicircle_pencil(), 1.0, 1e-5) - 1.0 / M_PI) < 1e-4);
  CHECK(std::abs(density_of_states(product_pencil(1), -1.0, 1e-5) - 0.5 / M_PI) < 1e-4);
  CHECK(density_of_states(semicircle_pencil(), 100.0, 1e-5) < 1e-6);
  double r1 = density_of_states(semicircle_pencil(), 2.5, 1e-3, true);
  double x = 1.5, exact = std::sqrt(4.0 - x * x) / (2.0 * M_PI);
  CHECK(std::abs(r1 - exact) < std::abs(density_of_states(semicircle_pencil(), 2.5, 1e-3) - exact));
}

TEST_CASE("density profile: mass and monotone cumulative") {
  DensityProfile d = density_profile(anticommutator_pencil(), linear_grid(-4.0, 6.0, 801), 1e-5);
  CHECK(std::abs(d.cumulative.back() - 1.0) < 5e-3);
  for (std::size_t i = 1; i < d.cumulative.size(); ++i) CHECK(d.cumulative[i] >= d.cumulative[i - 1]);
  for (double r : d.rho) CHECK(r >= 0.0);
  CHECK(std::abs(integrate_density(semicircle_pencil(), -1.5, 3.5, 1e-6) - 1.0) < 5e-3);
}

TEST_CASE("rho does not depend on the linearization") {
  NCPolynomial q = parse_poly("x1*x2+x2*x1 + 0.5*x1^2", 2, 0);
  SymmetrizedLinearization S = standard_linearization(q);
  Linearization a = as_linearization(S), b = as_linearization(minimal_linearization(S));
  for (double E : linear_grid(-1.0, 2.0, 50)) CHECK(std::abs(density_of_states(a, E, 1e-5) - density_of_states(b, E, 1e-5)) < 1e-6);
}

TEST_CASE("detect_bulk") {
  auto iv = detect_bulk(semicircle_pencil(), 0.1, -4.0, 6.0);
  REQUIRE(iv.size() == 1);
  /// rho = 0.1 where sqrt(4 - x^2) = 0.2 pi.
  double half = std::sqrt(4.0 - std::pow(0.2 * M_PI, 2));
  CHECK(std::abs(iv[0].first - (1.0 - half)) < 0.05);
  CHECK(std::abs(iv[0].second - (1.0 + half)) < 0.05);
  CHECK(detect_bulk(semicircle_pencil(), 10.0, -4.0, 6.0).empty());
  auto mp = detect_bulk(product_pencil(1), 0.05, -5.0, 3.0);
  REQUIRE(mp.size() == 1);
  CHECK(mp[0].first > -3.0);
  CHECK(mp[0].second < 1.0);
}

TEST_CASE("a priori growth |M| <= C (1 + 1/eta)") {
  Linearization L = anticommutator_pencil();
  double C = 0.0;
  for (double eta : log_grid(1e-4, 1e2, 13))
    for (double E : {-2.0, 0.0, 1.0, 3.0}) C = std::max(C, operator_norm(solve_del(L, cplx(E, eta)).M) / (1.0 + 1.0 / eta));
  CHECK(std::isfinite(C));
  CHECK(C < 10.0);
}

TEST_CASE("trace comparability Tr Im M <= C Im M11") {
  Linearization L = product_pencil(2);
  double C = 0.0;
  for (double E : linear_grid(-5.0, 0.5, 23)) {
    DELSolution s = solve_del(L, cplx(E, 1e-3));
    C = std::max(C, imag_part(s.M).trace().real() / s.M(0, 0).imag());
  }
  CHECK(std::isfinite(C));
}

TEST_CASE("stability matrix: scalar case and action") {
  Linearization L = semicircle_pencil();
  CMatrix M(1, 1);
  M(0, 0) = cplx(0.0, 1.0);
  CHECK(std::abs(stability_matrix(L, M)(0, 0) - 2.0) < 1e-15);

  Linearization A = anticommutator_pencil();
  DELSolution s = solve_del(A, cplx(0.3, 0.2));
  CMatrix S = stability_matrix(A, s.M);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    CMatrix R = testing::random_matrix(rng, A.m());
    CMatrix direct = R - s.M * apply_superop(A, R) * s.M;
    CVector v = Eigen::Map<CVector>(R.data(), R.size());
    CVector w = S * v;
    CHECK((Eigen::Map<CMatrix>(w.data(), A.m(), A.m()) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
  }
}

TEST_CASE("quadratic form: stability determinant in reduced block form") {
  /// det = (1 - M11^2 Tr Mhat^2) det(I - M11^2 Mhat^t Mhat) for the pencil diag(1, Xi^{-1}).
  std::mt19937_64 rng(12);
  for (int t = 0; t < 3; ++t) {
    CMatrix Xi = testing::random_invertible_hermitian(rng, 2 + t);
    Linearization L = as_linearization(quadratic_form_pencil(Xi));
    const cplx z(0.2 + 0.3 * t, 0.1);
    DELSolution s = solve_del(L, z);
    const Eigen::Index g = Xi.rows();
    const cplx m11 = s.M(0, 0);
    CMatrix Mh = s.M.bottomRightCorner(g, g);
    cplx reduced = (1.0 - m11 * m11 * (Mh * Mh).trace()) *
                   (CMatrix::Identity(g, g) - m11 * m11 * Mh.transpose() * Mh).determinant();
    cplx det = stability_matrix(L, s.M).determinant();
    CHECK(std::abs(det - reduced) < 1e-9 * (1.0 + std::abs(reduced)));
  }
}

TEST_CASE("dM/dz: trivial model and finite differences") {
  for (cplx z : {cplx(0.0, 1.0), cplx(2.0, 0.3)}) {
    CMatrix M = solve_del(zero_pencil(), z).M;
    CHECK(std::abs(dM_dz(zero_pencil(), M, z)(0, 0) - 1.0 / ((1.0 - z) * (1.0 - z))) < 1e-13);
  }
  Linearization L = semicircle_pencil();
  const cplx z(0.0, 1.0);
  const double h = 1e-5;
  cplx fd = (solve_del(L, z + h).M(0, 0) - solve_del(L, z - h).M(0, 0)) / (2.0 * h);
  CHECK(std::abs(dM_dz(L, solve_del(L, z).M, z)(0, 0) - fd) < 1e-7);

  CMatrix Xi(2, 2);
  Xi << 0.0, 1.0, 1.0, 0.0;
  Linearization Q = as_linearization(quadratic_form_pencil(Xi));
  const cplx w(1.0, 0.01);
  CMatrix fdQ = (solve_del(Q, w + h).M - solve_del(Q, w - h).M) / (2.0 * h);
  CHECK((dM_dz(Q, solve_del(Q, w).M, w) - fdQ).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("dM/dz: observed finite difference order") {
  Linearization L = anticommutator_pencil();
  const cplx z(0.5, 0.2);
  CMatrix D = dM_dz(L, solve_del(L, z).M, z);
  double e[3];
  double h = 2e-2;
  for (int k = 0; k < 3; ++k, h /= 2.0)
    e[k] = ((solve_del(L, z + h).M - solve_del(L, z - h).M) / (2.0 * h) - D).norm();
  CHECK(std::log2(e[0] / e[1]) >= 1.8);
  CHECK(std::log2(e[1] / e[2]) >= 1.8);
}

TEST_CASE("assess_M1_M2: anticommutator passes, single eta row") {
  StabilityOptions o;
  o.energies_per_interval = 4;
  o.eta_grid = log_grid(1e-6, 1e2, 9);
  StabilityReport r = assess_M1_M2(anticommutator_pencil(), o);
  CHECK(r.pass);
  CHECK(r.failures.empty());
  double supM = 0.0;
  for (const auto& row : r.table) supM = std::max(supM, row.M_norm);
  CHECK(supM == r.sup_M_norm);
  o.eta_grid = {1e-3};
  o.energies_per_interval = 1;
  StabilityReport one = assess_M1_M2(semicircle_pencil(), o);
  CHECK(one.table.size() == 1);
}

TEST_CASE("product stability determinant: vanishing point and sign") {
  for (int b = 1; b <= 3; ++b) {
    const double zc = product_edge(b);
    const double m1 = std::pow(double(b) / (b + 1), b) / b;
    ProductOracle o = product_solution_from_root(b, cplx(zc, 0.0), m1);
    CHECK(std::abs((1.0 - zc) * m1 - double(b + 1) / b) < 1e-12);
    cplx det = stability_matrix(product_pencil(b), o.M).determinant();
    CHECK(std::abs(det) < 1e-8);
    CHECK(std::abs(product_stability_det_closed_form(b, (b + 1.0) / b)) < 1e-12);
    /// Away from the edge the determinant differs from the closed form by exactly (-1)^{b*}.
    const cplx z(-0.7, 0.05);
    ProductOracle p = oracle_product(b, z);
    cplx d = stability_matrix(product_pencil(b), p.M).determinant();
    cplx closed = product_stability_det_closed_form(b, (1.0 - z) * p.m1);
    CHECK(std::abs(d - std::pow(-1.0, b) * closed) < 1e-9 * (1.0 + std::abs(closed)));
  }
}

TEST_CASE("grids") {
  auto g = log_grid(1e-6, 1e2, 9);
  CHECK(g.size() == 9);
  CHECK(std::abs(g.front() - 1e-6) < 1e-20);
  CHECK(std::abs(g.back() - 1e2) < 1e-12);
  auto l = linear_grid(-1.0, 1.0, 3);
  CHECK(l[1] == 0.0);
}
