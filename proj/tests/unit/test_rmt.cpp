#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ncdel/del.hpp"
#include "ncdel/io.hpp"
#include "ncdel/oracles.hpp"
#include "ncdel/rmt.hpp"
#include "../support.hpp"

using namespace ncdel;

namespace {

EnsembleConfig config(int N, std::uint64_t seed = 1, EntryLaw law = EntryLaw::ComplexGaussian) {
  EnsembleConfig c;
  c.N = N;
  c.seed = seed;
  c.law_x = c.law_y = law;
  return c;
}

Linearization anticommutator_pencil() {
  return as_linearization(minimal_linearization(standard_linearization(parse_poly("x1*x2+x2*x1", 2, 0))));
}

}  // namespace

TEST_CASE("sampling is reproducible bit for bit") {
  MatrixAssignment a = sample_ensemble(config(2, 42), 1, 1, 0);
  MatrixAssignment b = sample_ensemble(config(2, 42), 1, 1, 0);
  CHECK(a.X[0] == b.X[0]);
  CHECK(a.Y[0] == b.Y[0]);
  MatrixAssignment c = sample_ensemble(config(2, 42), 1, 1, 1);
  CHECK(a.X[0] != c.X[0]);
  CHECK_THROWS_AS(sample_ensemble(config(1), 1, 0, 0), DomainError);
}

TEST_CASE("entry variance is 1/N and x samples are hermitian") {
  const int N = 500;
  MatrixAssignment a = sample_ensemble(config(N, 3), 1, 1, 0);
  CHECK(hermitian_defect(a.X[0]) == 0.0);
  for (Eigen::Index i = 0; i < N; ++i) CHECK(a.X[0](i, i).imag() == 0.0);
  double vx = a.X[0].cwiseAbs2().mean(), vy = a.Y[0].cwiseAbs2().mean();
  CHECK(std::abs(vx * N - 1.0) < 0.1);
  CHECK(std::abs(vy * N - 1.0) < 0.1);
  CHECK(std::abs(a.Y[0].mean()) < 5.0 / N);
}

TEST_CASE("bernoulli and real laws") {
  const int N = 200;
  MatrixAssignment a = sample_ensemble(config(N, 5, EntryLaw::Bernoulli), 1, 1, 0);
  const double s = 1.0 / std::sqrt(double(N));
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      CHECK(std::abs(std::abs(a.Y[0](i, j)) - s) < 1e-15);
      CHECK(a.Y[0](i, j).imag() == 0.0);
    }
  CHECK(std::abs(a.Y[0].mean()) < 5.0 / N);
  MatrixAssignment r = sample_ensemble(config(N, 5, EntryLaw::RealGaussian), 1, 0, 0);
  CHECK(r.X[0].imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK(parse_law("bernoulli") == EntryLaw::Bernoulli);
  CHECK(law_name(EntryLaw::RealGaussian) == "real-gaussian");
  CHECK_THROWS_AS(parse_law("cauchy"), DomainError);
}

TEST_CASE("linearized matrix: trivial samples, semicircle, product block") {
  Linearization L = anticommutator_pencil();
  MatrixAssignment zero;
  zero.X = {CMatrix::Zero(4, 4), CMatrix::Zero(4, 4)};
  LinearizedMatrix H0 = build_linearized_matrix(L, zero);
  for (Eigen::Index k = 0; k < L.m(); ++k)
    for (Eigen::Index l = 0; l < L.m(); ++l)
      CHECK((H0.H.block(k * 4, l * 4, 4, 4) - L.K0(k, l) * CMatrix::Identity(4, 4)).norm() < 1e-15);

  Linearization S = as_linearization(standard_linearization(parse_poly("x1", 1, 0)));
  MatrixAssignment one = sample_ensemble(config(6), 1, 0, 0);
  CHECK((build_linearized_matrix(S, one).H - (CMatrix::Identity(6, 6) - one.X[0])).norm() < 1e-15);

  Linearization P = product_pencil(1);
  MatrixAssignment y = sample_ensemble(config(5), 0, 1, 0);
  LinearizedMatrix Hp = build_linearized_matrix(P, y);
  CHECK(hermitian_defect(Hp.H) < 1e-15);
  CHECK((Hp.H.block(0, 5, 5, 5) + y.Y[0]).norm() < 1e-15);
}

TEST_CASE("generalized resolvent: trivial pencil and Schur identity") {
  Linearization Z;
  Z.K0 = CMatrix::Identity(1, 1);
  LinearizedMatrix H0;
  H0.H = CMatrix::Identity(3, 3);
  H0.m = 1;
  H0.N = 3;
  const cplx z(0.4, 0.7);
  CHECK((generalized_resolvent_block(H0, z).G11 - CMatrix::Identity(3, 3) / (1.0 - z)).norm() < 1e-15);

  NCPolynomial q = parse_poly("x1*x2+x2*x1", 2, 0);
  Linearization L = anticommutator_pencil();
  MatrixAssignment s = sample_ensemble(config(30, 9), 2, 0, 0);
  CMatrix P = CMatrix::Identity(30, 30) - evaluate(q, s);
  const cplx w(1.0, 0.5);
  CMatrix R = (P - w * CMatrix::Identity(30, 30)).inverse();
  GeneralizedResolvent G = generalized_resolvent_block(build_linearized_matrix(L, s), w, true);
  CHECK((G.G11 - R).cwiseAbs().maxCoeff() < 1e-10);
  REQUIRE(G.diagonal.size() == 30);
  for (int i = 0; i < 30; ++i) CHECK(std::abs(G.diagonal[i](0, 0) - R(i, i)) < 1e-10);
  CHECK_THROWS_AS(generalized_resolvent_block(H0, cplx(0.0, 0.0)), DomainError);
}

TEST_CASE("generalized resolvent norm grows at most like 1/eta") {
  Linearization L = anticommutator_pencil();
  MatrixAssignment s = sample_ensemble(config(50, 4), 2, 0, 0);
  LinearizedMatrix H = build_linearized_matrix(L, s);
  double C = 0.0;
  for (double eta : {1.0, 0.1, 0.01}) {
    CMatrix A = H.H;
    A.topLeftCorner(50, 50).diagonal().array() -= cplx(0.5, eta);
    C = std::max(C, operator_norm(CMatrix(A.inverse())) / (1.0 + 1.0 / eta));
  }
  CHECK(C <= 100.0);
}

TEST_CASE("resolvent statistics") {
  CMatrix P = CMatrix::Identity(10, 10);
  ResolventErrors e = resolvent_stats(P, cplx(0.0, 1.0), 1.0 / cplx(1.0, -1.0));
  CHECK(e.max_entry_err < 1e-15);
  CHECK(e.avg_err < 1e-15);
  NCPolynomial q = parse_poly("x1*x2+x2*x1", 2, 0);
  MatrixAssignment s = sample_ensemble(config(300, 2), 2, 0, 0);
  Spectrum sp = hermitian_spectrum(CMatrix::Identity(300, 300) - evaluate(q, s));
  Linearization L = anticommutator_pencil();
  auto err = [&](double eta) {
    cplx z(1.0, eta);
    return resolvent_stats(sp, z, solve_del(L, z).M(0, 0));
  };
  ResolventErrors big = err(1.0), small = err(0.01);
  CHECK(small.max_entry_err > big.max_entry_err);
  CHECK(big.avg_err <= big.max_entry_err);
}

TEST_CASE("Ward identity on the hermitian resolvent") {
  NCPolynomial q = parse_poly("y1*y1'", 0, 1);
  MatrixAssignment s = sample_ensemble(config(80, 6), 0, 1, 0);
  CMatrix P = CMatrix::Identity(80, 80) - evaluate(q, s);
  const double eta = 0.05;
  CMatrix R = resolvent(hermitian_spectrum(P), cplx(-1.0, eta));
  RVector rows = R.cwiseAbs2().rowwise().sum();
  for (Eigen::Index i = 0; i < 80; ++i) CHECK(std::abs(rows(i) - R(i, i).imag() / eta) < 1e-9 * rows(i));
}

TEST_CASE("linear fit") {
  FitResult f = linear_fit({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(std::abs(f.slope - 2.0) < 1e-14);
  CHECK(std::abs(f.intercept - 1.0) < 1e-14);
  CHECK(f.slope_stderr < 1e-12);
  CHECK_THROWS_AS(linear_fit({1.0}, {1.0}), DomainError);
}

TEST_CASE("experiments: schur identity, reproducibility across thread counts") {
  NCPolynomial q = parse_poly("x1*x2+x2*x1", 2, 0);
  Linearization L = anticommutator_pencil();
  ExperimentParams p;
  p.N_list = {20};
  p.reps = 3;
  p.energies = 4;
  p.threads = 1;
  ExperimentReport a = run_experiment("schur", L, q, p);
  CHECK(a.scalars["max_schur_rel_err"] < 1e-10);
  CHECK(a.scalars["max_ward_rel_err"] < 1e-9);
  p.threads = 3;
  ExperimentReport b = run_experiment("schur", L, q, p);
  a.wall_clock_s = b.wall_clock_s = 0.0;
  CHECK(experiment_report_to_json(a).dump() == experiment_report_to_json(b).dump());
}

TEST_CASE("experiments: speed needs three sizes, globaldos matches the density") {
  NCPolynomial q = parse_poly("x1", 1, 0);
  Linearization L = as_linearization(standard_linearization(q));
  ExperimentParams p;
  p.reps = 2;
  p.N_list = {50, 100};
  CHECK_THROWS_AS(run_experiment("speed", L, q, p), DomainError);
  p.N_list = {50, 100, 200};
  ExperimentReport s = run_experiment("speed", L, q, p);
  CHECK(s.scalars["limit_mean"] == 1.0);
  CHECK(s.fits.count("err_vs_N") == 1);
  p.N_list = {400};
  p.bins = 16;
  p.E_lo = -1.5;
  p.E_hi = 3.5;
  ExperimentReport g = run_experiment("globaldos", L, q, p);
  CHECK(g.scalars["sup_bin_discrepancy"] < 0.1);
  CHECK_THROWS_AS(run_experiment("nonsense", L, q, p), DomainError);
}
