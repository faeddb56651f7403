#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ncdel/del.hpp"
#include "ncdel/freeprob.hpp"
#include "ncdel/io.hpp"
#include "ncdel/linearize.hpp"
#include "ncdel/ncpoly.hpp"
#include "ncdel/rmt.hpp"

using namespace ncdel;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

void emit_error(const std::string& type, const std::string& message, int code) {
  Json e;
  e["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
  std::cerr << e.dump() << '\n';
}

/// Writes to `path`, or to stdout when the path is empty or "-".
void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw DomainError("cannot write '" + path + "'");
  os << text;
}

/// CSV outputs carry their config in a sidecar next to the file, or on stderr when streamed.
void echo_config(const std::string& out, const Json& config) {
  if (out.empty() || out == "-")
    std::cerr << Json{{"config", config}}.dump() << '\n';
  else
    write_text(out + ".config.json", config.dump(1) + "\n");
}

cplx parse_complex(const std::string& s) {
  std::stringstream ss(s);
  double re = 0.0, im = 0.0;
  char comma = 0;
  if (!(ss >> re) || !(ss >> comma) || comma != ',' || !(ss >> im) || !ss.eof())
    throw DomainError("expected 're,im', got '" + s + "'");
  return {re, im};
}

/// Internal energies refer to 1 - q; the user sees p = c - q, a shift by c - 1.
double energy_shift(const Linearization& L) { return L.offset - 1.0; }

struct Common {
  int threads = 0;
  std::string out;
};

struct PolyArgs {
  std::string expr;
  int alpha = 0;
  int beta = 0;
};

void add_poly_options(CLI::App* app, PolyArgs& p, bool required) {
  auto* e = app->add_option("--expr", p.expr, "self-adjoint polynomial p in x1.., y1.., y1'..");
  if (required) e->required();
  app->add_option("--alpha", p.alpha, "number of hermitian symbols x")->capture_default_str()->check(CLI::NonNegativeNumber);
  app->add_option("--beta", p.beta, "number of general symbols y")->capture_default_str()->check(CLI::NonNegativeNumber);
}

Json run_linearize(const PolyArgs& pa, bool minimize, const Common& c) {
  NCPolynomial p = parse_poly(pa.expr, pa.alpha, pa.beta);
  PencilBuild b = linearize_polynomial(p, minimize);
  Json config = {{"command", "linearize"}, {"expr", pa.expr},       {"alpha", pa.alpha},
                 {"beta", pa.beta},        {"minimize", minimize}, {"out", c.out}};
  VerificationReport v = verify_linearization(b.symmetrized, b.q);
  NilpotencyReport n = check_nilpotency(b.symmetrized);
  MinimalityReport mr = minimality_report(b.symmetrized);
  Json report;
  report["q"] = format_poly(b.q);
  report["offset"] = b.pencil.offset;
  report["m_standard"] = b.standard.m();
  report["m"] = b.pencil.m();
  report["verification"] = {{"pass", v.pass},
                            {"max_coeff_err", v.max_coeff_err},
                            {"method", v.method},
                            {"words_checked", v.words_checked}};
  if (v.first_mismatch) report["verification"]["first_mismatch"] = *v.first_mismatch;
  report["nilpotency"] = {{"K0_invertible", n.K0_invertible},
                          {"normalized", n.normalized},
                          {"nilpotent", n.nilpotent()},
                          {"chain_dims", n.chain_dims}};
  report["nilpotency"]["index"] = n.index ? Json(*n.index) : Json(nullptr);
  report["minimality"] = {{"rank_right", mr.rank_right},
                          {"rank_left", mr.rank_left},
                          {"ambiguous", mr.ambiguous},
                          {"minimal", mr.minimal}};
  Json doc = {{"config", config}, {"report", report}};
  if (c.out.empty() || c.out == "-")
    doc["linearization"] = linearization_to_json(b.pencil);
  else
    save_linearization(c.out, b.pencil);
  return doc;
}

Json run_solve(const std::string& lin, const std::string& zs, const SolverOptions& so, const Common& c) {
  Linearization L = load_linearization(lin);
  cplx z_user = parse_complex(zs);
  cplx z = z_user - energy_shift(L);
  DELSolution s = solve_del(L, z, so);
  Json config = {{"command", "solve"}, {"lin", lin}, {"z", to_json(z_user)}, {"tol", so.tol}, {"threads", c.threads}};
  return {{"config", config},
          {"z", to_json(z_user)},
          {"z_internal", to_json(z)},
          {"M", to_json(s.M)},
          {"m11", to_json(s.M(0, 0))},
          {"residual", s.residual_norm},
          {"iterations", s.iterations},
          {"newton_steps", s.newton_steps},
          {"stages", s.stages}};
}

void run_dos(const std::string& lin, double emin, double emax, int points, double eta, bool richardson,
             const SolverOptions& so, const Common& c) {
  Linearization L = load_linearization(lin);
  const double shift = energy_shift(L);
  std::vector<double> user = linear_grid(emin, emax, points), internal = user;
  for (double& e : internal) e -= shift;
  DensityProfile d = density_profile(L, internal, eta, richardson, so);
  std::ostringstream os;
  write_dos_csv(os, user, d.rho, eta, d.residual);
  write_text(c.out, os.str());
  echo_config(c.out, {{"command", "dos"},
                      {"lin", lin},
                      {"emin", emin},
                      {"emax", emax},
                      {"points", points},
                      {"eta", eta},
                      {"richardson", richardson},
                      {"threads", c.threads},
                      {"mass", d.cumulative.empty() ? 0.0 : d.cumulative.back()}});
}

Json run_stability(const std::string& lin, StabilityOptions st, double eta_min, double eta_max, int eta_points,
                   const SolverOptions& so, const Common& c) {
  Linearization L = load_linearization(lin);
  const double shift = energy_shift(L);
  Json config = {{"command", "stability"}, {"lin", lin},           {"kappa", st.kappa},
                 {"emin", st.E_lo},        {"emax", st.E_hi},      {"eta_min", eta_min},
                 {"eta_max", eta_max},     {"eta_points", eta_points}, {"threshold", st.threshold},
                 {"energies", st.energies_per_interval}, {"bulk_points", st.bulk_grid_points},
                 {"threads", c.threads}};
  st.E_lo -= shift;
  st.E_hi -= shift;
  st.eta_grid = log_grid(eta_min, eta_max, eta_points);
  StabilityReport r = assess_M1_M2(L, st, so);
  return {{"config", config}, {"report", stability_report_to_json(r, shift)}};
}

void run_moments(const PolyArgs& pa, int kmax, const Common& c) {
  NCPolynomial p = parse_poly(pa.expr, pa.alpha, pa.beta);
  ShiftedPolynomial sp = shift_to_q(p);
  NCPolynomial qh = sp.q.beta_star() > 0 ? hermitize(sp.q) : sp.q;
  std::map<int, double> base = limiting_moments(qh, kmax);
  /// tau(p^k) from tau((1 - q)^j) by the binomial theorem, p = (1 - q) + (c - 1).
  const double s = sp.offset - 1.0;
  std::map<int, double> out;
  for (int k = 0; k <= kmax; ++k) {
    double acc = 0.0, binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      acc += binom * std::pow(s, k - j) * base.at(j);
      binom = binom * (k - j) / (j + 1);
    }
    out[k] = acc;
  }
  std::ostringstream os;
  write_moments_csv(os, out);
  write_text(c.out, os.str());
  echo_config(c.out, {{"command", "moments"},
                      {"expr", pa.expr},
                      {"alpha", pa.alpha},
                      {"beta", pa.beta},
                      {"kmax", kmax}});
}

Json run_simulate(const PolyArgs& pa, const std::string& lin, ExperimentParams prm, double E_user,
                  const std::string& law, const std::string& raw, const Common& c) {
  NCPolynomial p = parse_poly(pa.expr, pa.alpha, pa.beta);
  ShiftedPolynomial sp = shift_to_q(p);
  Linearization L = lin.empty() ? linearize_polynomial(p, true).pencil : load_linearization(lin);
  if (!lin.empty() && std::abs(L.offset - sp.offset) > 0.0)
    throw DomainError("pencil offset does not match the constant term of --expr");
  const double shift = energy_shift(L);
  prm.law = parse_law(law);
  prm.threads = c.threads;
  prm.E = std::isnan(E_user) ? E_user : E_user - shift;
  prm.E_lo -= shift;
  prm.E_hi -= shift;
  Json config = {{"command", "simulate"}, {"experiment", prm.kind}, {"expr", pa.expr},
                 {"alpha", pa.alpha},     {"beta", pa.beta},        {"lin", lin},
                 {"N", prm.N_list},       {"reps", prm.reps},       {"seed", prm.seed},
                 {"gamma", prm.gamma},    {"kappa", prm.kappa},     {"n_eta", prm.n_eta},
                 {"E", std::isnan(E_user) ? Json("bulk-argmax") : Json(E_user)},
                 {"eta", prm.eta},        {"energies", prm.energies}, {"deloc_vectors", prm.deloc_vectors},
                 {"bins", prm.bins},      {"emin", prm.E_lo + shift}, {"emax", prm.E_hi + shift},
                 {"bulk_points", prm.bulk_grid_points}, {"law", law}, {"raw", raw}, {"threads", c.threads}};
  ExperimentReport r = run_experiment(prm.kind, L, sp.q, prm);
  for (const char* key : {"E", "bin_edges"})
    if (r.series.count(key))
      for (double& e : r.series[key]) e += shift;
  for (const char* key : {"E", "limit_mean"})
    if (r.scalars.count(key)) r.scalars[key] += shift;
  for (auto& row : r.raw)
    if (row.count("E")) row["E"] += shift;
  if (!raw.empty()) {
    std::ostringstream os;
    write_raw_csv(os, r);
    write_text(raw, os.str());
  }
  Json doc = experiment_report_to_json(r);
  doc["config"] = config;
  doc["energy_shift"] = shift;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyson equation for linearizations of noncommutative polynomials in random matrices"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "worker threads, 0 selects all cores")->capture_default_str();

  SolverOptions so;
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--tol", so.tol, "DEL residual tolerance")->capture_default_str();
  };

  PolyArgs lin_poly;
  bool minimize = false;
  auto* lin_cmd = app.add_subcommand("linearize", "build a self-adjoint linearization of p");
  add_poly_options(lin_cmd, lin_poly, true);
  lin_cmd->add_flag("--minimize", minimize, "reduce to a minimal pencil");
  lin_cmd->add_option("--out", common.out, "pencil JSON file; omitted embeds the pencil in stdout");

  std::string lin_file, zs;
  auto* solve_cmd = app.add_subcommand("solve", "solve the DEL at one spectral point");
  solve_cmd->add_option("--lin", lin_file, "pencil JSON")->required();
  solve_cmd->add_option("--z", zs, "spectral parameter as re,im")->required();
  add_solver(solve_cmd);

  double emin = -4.0, emax = 4.0, eta = 1e-5;
  int points = 400;
  bool richardson = false;
  auto* dos_cmd = app.add_subcommand("dos", "density of states on an energy grid (CSV)");
  dos_cmd->add_option("--lin", lin_file, "pencil JSON")->required();
  dos_cmd->add_option("--emin", emin)->capture_default_str();
  dos_cmd->add_option("--emax", emax)->capture_default_str();
  dos_cmd->add_option("--points", points)->capture_default_str()->check(CLI::PositiveNumber);
  dos_cmd->add_option("--eta", eta)->capture_default_str()->check(CLI::PositiveNumber);
  dos_cmd->add_flag("--richardson", richardson, "two-point extrapolation in eta");
  dos_cmd->add_option("--out", common.out, "CSV file; omitted writes to stdout");
  add_solver(dos_cmd);

  StabilityOptions st;
  double eta_min = 1e-6, eta_max = 1e2;
  int eta_points = 17;
  auto* stab_cmd = app.add_subcommand("stability", "numerical check of the boundedness and stability assumptions");
  stab_cmd->add_option("--lin", lin_file, "pencil JSON")->required();
  stab_cmd->add_option("--kappa", st.kappa)->capture_default_str();
  stab_cmd->add_option("--emin", st.E_lo)->capture_default_str();
  stab_cmd->add_option("--emax", st.E_hi)->capture_default_str();
  stab_cmd->add_option("--eta-min", eta_min)->capture_default_str()->check(CLI::PositiveNumber);
  stab_cmd->add_option("--eta-max", eta_max)->capture_default_str()->check(CLI::PositiveNumber);
  stab_cmd->add_option("--eta-points", eta_points)->capture_default_str()->check(CLI::PositiveNumber);
  stab_cmd->add_option("--threshold", st.threshold)->capture_default_str();
  stab_cmd->add_option("--energies", st.energies_per_interval, "energies per bulk interval")->capture_default_str();
  stab_cmd->add_option("--bulk-points", st.bulk_grid_points)->capture_default_str();
  stab_cmd->add_option("--out", common.out, "JSON file; omitted writes to stdout");
  add_solver(stab_cmd);

  PolyArgs mom_poly;
  int kmax = 4;
  auto* mom_cmd = app.add_subcommand("moments", "limiting moments tau(p^k) (CSV)");
  add_poly_options(mom_cmd, mom_poly, true);
  mom_cmd->add_option("--kmax", kmax)->capture_default_str()->check(CLI::NonNegativeNumber);
  mom_cmd->add_option("--out", common.out, "CSV file; omitted writes to stdout");

  PolyArgs sim_poly;
  ExperimentParams prm;
  double E_user = std::nan("");
  std::string law = "complex-gaussian", raw;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo experiment (JSON report)");
  add_poly_options(sim_cmd, sim_poly, true);
  sim_cmd->add_option("--experiment", prm.kind)
      ->required()
      ->check(CLI::IsMember({"schur", "locallaw", "rigidity", "deloc", "speed", "globaldos"}));
  sim_cmd->add_option("--lin", lin_file, "pencil JSON; omitted builds the minimal pencil of --expr");
  sim_cmd->add_option("--N", prm.N_list, "matrix sizes")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--reps", prm.reps)->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", prm.seed)->capture_default_str();
  sim_cmd->add_option("--gamma", prm.gamma)->capture_default_str();
  sim_cmd->add_option("--kappa", prm.kappa)->capture_default_str();
  sim_cmd->add_option("--n-eta", prm.n_eta)->capture_default_str();
  sim_cmd->add_option("--E", E_user, "energy for locallaw; omitted selects the bulk density maximum");
  sim_cmd->add_option("--eta", prm.eta, "spectral height for schur")->capture_default_str();
  sim_cmd->add_option("--energies", prm.energies)->capture_default_str();
  sim_cmd->add_option("--deloc-vectors", prm.deloc_vectors)->capture_default_str();
  sim_cmd->add_option("--bins", prm.bins)->capture_default_str();
  sim_cmd->add_option("--emin", prm.E_lo)->capture_default_str();
  sim_cmd->add_option("--emax", prm.E_hi)->capture_default_str();
  sim_cmd->add_option("--bulk-points", prm.bulk_grid_points)->capture_default_str();
  sim_cmd->add_option("--law", law)
      ->capture_default_str()
      ->check(CLI::IsMember({"complex-gaussian", "real-gaussian", "bernoulli"}));
  sim_cmd->add_option("--raw", raw, "per-replica CSV dump");
  sim_cmd->add_option("--out", common.out, "JSON file; omitted writes to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what(), kExitUsage);
    return kExitUsage;
  }
  so.threads = common.threads;

  try {
    if (*lin_cmd) {
      Json doc = run_linearize(lin_poly, minimize, common);
      std::cout << doc.dump(1) << '\n';
    } else if (*solve_cmd) {
      std::cout << run_solve(lin_file, zs, so, common).dump(1) << '\n';
    } else if (*dos_cmd) {
      run_dos(lin_file, emin, emax, points, eta, richardson, so, common);
    } else if (*stab_cmd) {
      write_text(common.out, run_stability(lin_file, st, eta_min, eta_max, eta_points, so, common).dump(1) + "\n");
    } else if (*mom_cmd) {
      run_moments(mom_poly, kmax, common);
    } else if (*sim_cmd) {
      write_text(common.out, run_simulate(sim_poly, lin_file, prm, E_user, law, raw, common).dump(1) + "\n");
    }
  } catch (const ParseError& e) {
    emit_error("parse", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const DomainError& e) {
    emit_error("domain", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const RankAmbiguityError& e) {
    emit_error("rank_ambiguity", e.what(), kExitNumerical);
    return kExitNumerical;
  } catch (const ConvergenceError& e) {
    emit_error("convergence", e.what(), kExitNumerical);
    return kExitNumerical;
  } catch (const NumericalError& e) {
    emit_error("numerical", e.what(), kExitNumerical);
    return kExitNumerical;
  }
  return 0;
}
