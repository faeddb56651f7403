#include "ncdel/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

namespace ncdel {

namespace {

/// JSON has no NaN or infinity; those become null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double read_number(const Json& j) {
  if (j.is_null()) return std::nan("");
  if (!j.is_number()) throw DomainError("expected a number, got " + j.dump());
  return j.get<double>();
}

Json number_list(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace

Json to_json(cplx c) { return Json::array({number(c.real()), number(c.imag())}); }

Json to_json(const CMatrix& A) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(to_json(A(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

cplx complex_from_json(const Json& j) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2) throw DomainError("complex entry must be [re, im], got " + j.dump());
  return cplx(read_number(j[0]), read_number(j[1]));
}

CMatrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw DomainError("matrix must be an array of rows");
  const Eigen::Index r = static_cast<Eigen::Index>(j.size());
  const Eigen::Index c = r ? static_cast<Eigen::Index>(j[0].size()) : 0;
  CMatrix A(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) throw DomainError("ragged matrix row");
    for (Eigen::Index k = 0; k < c; ++k) A(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
  }
  return A;
}

Json linearization_to_json(const Linearization& L) {
  Json j;
  j["m"] = L.m();
  j["alpha_star"] = L.alpha_star();
  j["beta_star"] = L.beta_star();
  j["K0"] = to_json(L.K0);
  j["K"] = Json::array();
  for (const auto& K : L.K) j["K"].push_back(to_json(K));
  j["L"] = Json::array();
  for (const auto& M : L.L) j["L"].push_back(to_json(M));
  j["offset"] = number(L.offset);
  return j;
}

Linearization linearization_from_json(const Json& j) {
  try {
    Linearization L;
    const auto m = j.at("m").get<Eigen::Index>();
    const int a = j.at("alpha_star").get<int>();
    const int b = j.at("beta_star").get<int>();
    L.K0 = matrix_from_json(j.at("K0"));
    for (const auto& k : j.at("K")) L.K.push_back(matrix_from_json(k));
    for (const auto& k : j.at("L")) L.L.push_back(matrix_from_json(k));
    if (j.contains("offset")) L.offset = read_number(j["offset"]);
    if (L.alpha_star() != a || L.beta_star() != b) throw DomainError("coefficient count does not match the header");
    auto square = [m](const CMatrix& A) { return A.rows() == m && A.cols() == m; };
    if (!square(L.K0)) throw DomainError("K0 is not m x m");
    for (const auto& K : L.K)
      if (!square(K)) throw DomainError("a K matrix is not m x m");
    for (const auto& M : L.L)
      if (!square(M)) throw DomainError("an L matrix is not m x m");
    return L;
  } catch (const Json::exception& e) {
    throw DomainError(std::string("malformed linearization document: ") + e.what());
  }
}

void save_linearization(const std::string& path, const Linearization& L) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot write '" + path + "'");
  os << linearization_to_json(L).dump(1) << '\n';
}

Linearization load_linearization(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot read '" + path + "'");
  Json j;
  try {
    is >> j;
  } catch (const Json::exception& e) {
    throw DomainError("'" + path + "' is not valid JSON: " + e.what());
  }
  return linearization_from_json(j);
}

Json stability_report_to_json(const StabilityReport& r, double shift) {
  Json j;
  j["kappa"] = number(r.kappa);
  j["bulk_intervals"] = Json::array();
  for (const auto& [lo, hi] : r.bulk_intervals) j["bulk_intervals"].push_back({number(lo + shift), number(hi + shift)});
  j["sup_M_norm"] = number(r.sup_M_norm);
  j["sup_Linv_norm"] = number(r.sup_Linv_norm);
  j["threshold"] = number(r.threshold);
  j["pass"] = r.pass;
  j["table"] = Json::array();
  for (const auto& row : r.table)
    j["table"].push_back({{"E", number(row.E + shift)},
                          {"eta", number(row.eta)},
                          {"M_norm", number(row.M_norm)},
                          {"sigma_min", number(row.sigma_min)}});
  j["failures"] = r.failures;
  return j;
}

Json experiment_report_to_json(const ExperimentReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["seed"] = r.seed;
  j["reps"] = r.reps;
  j["scalars"] = Json::object();
  for (const auto& [k, v] : r.scalars) j["scalars"][k] = number(v);
  j["series"] = Json::object();
  for (const auto& [k, v] : r.series) j["series"][k] = number_list(v);
  j["fits"] = Json::object();
  for (const auto& [k, f] : r.fits)
    j["fits"][k] = {{"slope", number(f.slope)},
                    {"slope_stderr", number(f.slope_stderr)},
                    {"intercept", number(f.intercept)},
                    {"points", f.points}};
  j["wall_clock_s"] = number(r.wall_clock_s);
  return j;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_dos_csv(std::ostream& os, const std::vector<double>& E, const std::vector<double>& rho, double eta,
                   const std::vector<double>& residual) {
  os << "E,rho,eta,residual\n";
  for (std::size_t i = 0; i < E.size(); ++i)
    os << format_double(E[i]) << ',' << format_double(rho[i]) << ',' << format_double(eta) << ','
       << format_double(residual[i]) << '\n';
}

void write_moments_csv(std::ostream& os, const std::map<int, double>& moments) {
  os << "k,moment\n";
  for (const auto& [k, v] : moments) os << k << ',' << format_double(v) << '\n';
}

void write_raw_csv(std::ostream& os, const ExperimentReport& r) {
  std::vector<std::string> cols;
  std::set<std::string> keys;
  for (const auto& row : r.raw)
    for (const auto& kv : row) keys.insert(kv.first);
  for (const char* k : {"N", "eta", "rep", "max_err", "avg_err"})
    if (keys.erase(k)) cols.emplace_back(k);
  cols.insert(cols.end(), keys.begin(), keys.end());
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (const auto& row : r.raw) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) os << ',';
      auto it = row.find(cols[c]);
      if (it != row.end()) os << format_double(it->second);
    }
    os << '\n';
  }
}

}  // namespace ncdel
