#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <random>
#include <sstream>

#include "ncdel/io.hpp"
#include "ncdel/oracles.hpp"
#include "../support.hpp"

using namespace ncdel;

TEST_CASE("linearization JSON round trip is bit exact") {
  std::mt19937_64 rng(1);
  Linearization L;
  L.K0 = testing::random_hermitian(rng, 4);
  L.K = {testing::random_hermitian(rng, 4)};
  L.L = {testing::random_matrix(rng, 4) * 1e-7, testing::random_matrix(rng, 4) * 3e5};
  L.offset = 1.0 / 3.0;
  L.K0(1, 2) = cplx(5e-324, -0.1);
  Linearization back = linearization_from_json(Json::parse(linearization_to_json(L).dump()));
  CHECK(back.K0 == L.K0);
  CHECK(back.K[0] == L.K[0]);
  CHECK(back.L[0] == L.L[0]);
  CHECK(back.L[1] == L.L[1]);
  CHECK(back.offset == L.offset);

  const std::string path = "roundtrip_pencil.json";
  save_linearization(path, product_pencil(2));
  Linearization p = load_linearization(path);
  CHECK(p.K0 == product_pencil(2).K0);
  CHECK(p.beta_star() == 2);
  std::remove(path.c_str());
}

TEST_CASE("linearization JSON layout") {
  Json j = linearization_to_json(product_pencil(1));
  CHECK(j["m"] == 2);
  CHECK(j["alpha_star"] == 0);
  CHECK(j["beta_star"] == 1);
  CHECK(j["L"][0][0][1] == Json::array({1.0, 0.0}));
  CHECK(j["K"].empty());
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(linearization_from_json(Json::parse(R"({"m": 1})")), DomainError);
  CHECK_THROWS_AS(
      linearization_from_json(Json::parse(R"({"m":2,"alpha_star":0,"beta_star":0,"K0":[[[1,0]]],"K":[],"L":[]})")),
      DomainError);
  CHECK_THROWS_AS(complex_from_json(Json::parse("[1, 2, 3]")), DomainError);
  CHECK_THROWS_AS(load_linearization("does/not/exist.json"), DomainError);
}

TEST_CASE("CSV writers") {
  std::ostringstream dos;
  write_dos_csv(dos, {0.1, 0.2}, {0.5, 0.25}, 1e-5, {1e-13, 2e-13});
  CHECK(dos.str().rfind("E,rho,eta,residual\n0.10000000000000001,0.5,", 0) == 0);
  std::ostringstream mom;
  write_moments_csv(mom, {{0, 1.0}, {1, 2.0}});
  CHECK(mom.str() == "k,moment\n0,1\n1,2\n");
  ExperimentReport r;
  r.raw.push_back({{"N", 10}, {"eta", 0.5}, {"rep", 0}, {"max_err", 0.1}, {"avg_err", 0.01}});
  std::ostringstream raw;
  write_raw_csv(raw, r);
  CHECK(raw.str() == "N,eta,rep,max_err,avg_err\n10,0.5,0,0.10000000000000001,0.01\n");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("stability report JSON mirrors the fields and shifts energies") {
  StabilityReport r;
  r.kappa = 0.05;
  r.bulk_intervals = {{-1.0, 2.0}};
  r.table.push_back({0.5, 1e-3, 2.0, 0.4});
  r.sup_M_norm = 2.0;
  r.sup_Linv_norm = 2.5;
  r.pass = true;
  Json j = stability_report_to_json(r, 1.0);
  CHECK(j["bulk_intervals"][0][0] == 0.0);
  CHECK(j["table"][0]["E"] == 1.5);
  CHECK(j["pass"] == true);
  CHECK(j.contains("failures"));
}
