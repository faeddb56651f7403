#include "ncdel/rmt.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ncdel/del.hpp"
#include "ncdel/freeprob.hpp"
#include "ncdel/rng.hpp"

namespace ncdel {

EntryLaw parse_law(const std::string& s) {
  if (s == "complex-gaussian") return EntryLaw::ComplexGaussian;
  if (s == "real-gaussian") return EntryLaw::RealGaussian;
  if (s == "bernoulli") return EntryLaw::Bernoulli;
  throw DomainError("unknown entry law '" + s + "'");
}

std::string law_name(EntryLaw law) {
  switch (law) {
    case EntryLaw::ComplexGaussian: return "complex-gaussian";
    case EntryLaw::RealGaussian: return "real-gaussian";
    case EntryLaw::Bernoulli: return "bernoulli";
  }
  return "?";
}

namespace {

cplx draw_offdiag(Stream& s, EntryLaw law, double N) {
  switch (law) {
    case EntryLaw::ComplexGaussian: {
      double a = s.normal(), b = s.normal();
      return cplx(a, b) / std::sqrt(2.0 * N);
    }
    case EntryLaw::RealGaussian: return s.normal() / std::sqrt(N);
    case EntryLaw::Bernoulli: return s.sign() / std::sqrt(N);
  }
  return 0.0;
}

double draw_diag(Stream& s, EntryLaw law, double N) {
  return law == EntryLaw::Bernoulli ? s.sign() / std::sqrt(N) : s.normal() / std::sqrt(N);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

/// Runs f(r) for r = 0..n-1 over a small pool; results must be written by index.
template <typename F>
void parallel_for(int n, int threads, F f) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int r = 0; r < n; ++r) f(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int r = next++; r < n; r = next++) {
        try {
          f(r);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

/// 1 - q evaluated on the samples, symmetrized against rounding.
CMatrix model_matrix(const NCPolynomial& q, const MatrixAssignment& a) {
  CMatrix P = -evaluate(q, a);
  P.diagonal().array() += 1.0;
  return (P + P.adjoint()) * 0.5;
}

struct BulkInfo {
  DensityProfile profile;
  std::vector<Interval> intervals;
};

BulkInfo bulk_info(const Linearization& L, const ExperimentParams& p, const SolverOptions& o) {
  BulkInfo b;
  b.profile = density_profile(L, linear_grid(p.E_lo, p.E_hi, p.bulk_grid_points), 1e-5, false, o);
  bool open = false;
  double start = 0.0;
  const auto& g = b.profile.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = b.profile.rho[i];
    bool in = r > p.kappa && r < 1.0 / p.kappa;
    if (in && !open) {
      open = true;
      start = g[i];
    }
    if (!in && open) {
      b.intervals.emplace_back(start, g[i - 1]);
      open = false;
    }
  }
  if (open) b.intervals.emplace_back(start, g.back());
  if (b.intervals.empty()) throw NumericalError("no bulk interval found for the requested kappa");
  return b;
}

double bulk_argmax(const BulkInfo& b) {
  double best = -1.0, E = 0.0;
  for (std::size_t i = 0; i < b.profile.grid.size(); ++i) {
    double x = b.profile.grid[i];
    bool inside = false;
    for (const auto& [lo, hi] : b.intervals) inside = inside || (x >= lo && x <= hi);
    if (inside && b.profile.rho[i] > best) {
      best = b.profile.rho[i];
      E = x;
    }
  }
  return E;
}

/// Interior energies of the longest bulk interval, offset half a step from both ends.
std::vector<double> bulk_energies(const BulkInfo& b, int n) {
  Interval best = b.intervals.front();
  for (const auto& iv : b.intervals)
    if (iv.second - iv.first > best.second - best.first) best = iv;
  std::vector<double> E(n);
  for (int k = 0; k < n; ++k) E[k] = best.first + (best.second - best.first) * (k + 0.5) / n;
  return E;
}

void add_fit(ExperimentReport& rep, const std::string& name, const std::vector<double>& x,
             const std::vector<double>& y) {
  if (x.size() < 3) throw DomainError("a scaling fit needs at least 3 points");
  rep.fits[name] = linear_fit(x, y);
}

}  // namespace

MatrixAssignment sample_ensemble(const EnsembleConfig& cfg, int alpha_star, int beta_star, int replica) {
  if (cfg.N < 2) throw DomainError("ensemble size must be at least 2");
  const Eigen::Index N = cfg.N;
  const double dN = cfg.N;
  MatrixAssignment a;
  for (int al = 0; al < alpha_star; ++al) {
    Stream s(cfg.seed, static_cast<std::uint64_t>(replica), 0, static_cast<std::uint64_t>(al));
    CMatrix X(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      X(i, i) = draw_diag(s, cfg.law_x, dN);
      for (Eigen::Index j = i + 1; j < N; ++j) {
        X(i, j) = draw_offdiag(s, cfg.law_x, dN);
        X(j, i) = std::conj(X(i, j));
      }
    }
    a.X.push_back(std::move(X));
  }
  for (int be = 0; be < beta_star; ++be) {
    Stream s(cfg.seed, static_cast<std::uint64_t>(replica), 1, static_cast<std::uint64_t>(be));
    CMatrix Y(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = 0; j < N; ++j) Y(i, j) = draw_offdiag(s, cfg.law_y, dN);
    a.Y.push_back(std::move(Y));
  }
  return a;
}

LinearizedMatrix build_linearized_matrix(const Linearization& L, const MatrixAssignment& a) {
  if (static_cast<int>(a.X.size()) < L.alpha_star() || static_cast<int>(a.Y.size()) < L.beta_star())
    throw DomainError("samples do not cover the pencil alphabet");
  const Eigen::Index m = L.m();
  Eigen::Index N = -1;
  for (const auto& X : a.X) N = X.rows();
  for (const auto& Y : a.Y) N = Y.rows();
  if (N <= 0) throw DomainError("cannot infer the sample size");
  LinearizedMatrix out;
  out.m = m;
  out.N = N;
  out.H = CMatrix::Zero(m * N, m * N);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index l = 0; l < m; ++l) {
      auto blk = out.H.block(k * N, l * N, N, N);
      if (L.K0(k, l) != cplx(0.0)) blk.diagonal().array() += L.K0(k, l);
      for (int al = 0; al < L.alpha_star(); ++al)
        if (L.K[al](k, l) != cplx(0.0)) blk -= L.K[al](k, l) * a.X[al];
      for (int be = 0; be < L.beta_star(); ++be) {
        if (L.L[be](k, l) != cplx(0.0)) blk -= L.L[be](k, l) * a.Y[be];
        cplx c = std::conj(L.L[be](l, k));
        if (c != cplx(0.0)) blk -= c * a.Y[be].adjoint();
      }
    }
  }
  return out;
}

GeneralizedResolvent generalized_resolvent_block(const LinearizedMatrix& H, cplx z, bool site_slices) {
  if (!(z.imag() > 0.0)) throw DomainError("generalized resolvent needs Im z > 0");
  const Eigen::Index N = H.N, m = H.m;
  CMatrix A = H.H;
  A.topLeftCorner(N, N).diagonal().array() -= z;
  Eigen::PartialPivLU<CMatrix> lu(A);
  GeneralizedResolvent out;
  if (site_slices) {
    CMatrix G = lu.inverse();
    if (!G.allFinite()) throw NumericalError("generalized resolvent is singular");
    out.G11 = G.topLeftCorner(N, N);
    out.diagonal.resize(N, CMatrix(m, m));
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index l = 0; l < m; ++l) out.diagonal[i](k, l) = G(k * N + i, l * N + i);
  } else {
    CMatrix rhs = CMatrix::Zero(m * N, N);
    rhs.topRows(N).setIdentity();
    CMatrix X = lu.solve(rhs);
    if (!X.allFinite()) throw NumericalError("generalized resolvent is singular");
    out.G11 = X.topRows(N);
  }
  return out;
}

Spectrum hermitian_spectrum(const CMatrix& P, bool vectors) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(P, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Spectrum s;
  s.eigenvalues = es.eigenvalues();
  if (vectors) s.eigenvectors = es.eigenvectors();
  return s;
}

CMatrix resolvent(const Spectrum& s, cplx z) {
  CVector d = (s.eigenvalues.cast<cplx>().array() - z).inverse();
  return s.eigenvectors * d.asDiagonal() * s.eigenvectors.adjoint();
}

ResolventErrors resolvent_stats(const Spectrum& s, cplx z, cplx m1) {
  if (!(z.imag() > 0.0)) throw DomainError("resolvent needs Im z > 0");
  CMatrix R = resolvent(s, z);
  R.diagonal().array() -= m1;
  ResolventErrors e;
  e.max_entry_err = R.cwiseAbs().maxCoeff();
  e.avg_err = std::abs(R.diagonal().mean());
  return e;
}

ResolventErrors resolvent_stats(const CMatrix& P, cplx z, cplx m1) {
  return resolvent_stats(hermitian_spectrum(P, true), z, m1);
}

FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear fit needs matching inputs with >= 2 points");
  const std::size_t n = x.size();
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[i];
    b(i) = y[i];
  }
  Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  FitResult f;
  f.intercept = c(0);
  f.slope = c(1);
  f.points = static_cast<int>(n);
  if (n > 2) {
    double rss = (A * c - b).squaredNorm();
    Eigen::Matrix2d cov = (A.transpose() * A).inverse() * (rss / static_cast<double>(n - 2));
    f.slope_stderr = std::sqrt(std::max(cov(1, 1), 0.0));
  }
  return f;
}

ExperimentReport run_experiment(const std::string& kind, const Linearization& L, const NCPolynomial& q,
                                const ExperimentParams& p) {
  auto t0 = std::chrono::steady_clock::now();
  if (p.reps < 1) throw DomainError("need at least one replica");
  if (p.N_list.empty()) throw DomainError("need at least one matrix size");
  const int a = q.alpha_star(), b = q.beta_star();
  if (a != L.alpha_star() || b != L.beta_star()) throw DomainError("polynomial and pencil alphabets differ");
  if (q.constant_term() != cplx(0.0)) throw DomainError("run_experiment expects q(0) = 0");

  SolverOptions so;
  so.threads = p.threads;
  ExperimentReport rep;
  rep.kind = kind;
  rep.seed = p.seed;
  rep.reps = p.reps;
  auto config_for = [&](int N) {
    EnsembleConfig c;
    c.N = N;
    c.law_x = c.law_y = p.law;
    c.seed = p.seed;
    c.replicas = p.reps;
    return c;
  };
  std::vector<double> Ns(p.N_list.begin(), p.N_list.end());
  rep.series["N"] = Ns;

  if (kind == "schur") {
    std::vector<double> energies = linear_grid(p.E_lo, p.E_hi, p.energies);
    double worst = 0.0, worst_ward = 0.0;
    for (int N : p.N_list) {
      std::vector<std::vector<std::map<std::string, double>>> rows(p.reps);
      parallel_for(p.reps, p.threads, [&](int r) {
        MatrixAssignment s = sample_ensemble(config_for(N), a, b, r);
        CMatrix P = model_matrix(q, s);
        LinearizedMatrix H = build_linearized_matrix(L, s);
        for (double E : energies) {
          cplx z(E, p.eta);
          CMatrix A = P;
          A.diagonal().array() -= z;
          CMatrix R = A.partialPivLu().inverse();
          CMatrix G = generalized_resolvent_block(H, z).G11;
          double rel = (G - R).cwiseAbs().maxCoeff() / R.cwiseAbs().maxCoeff();
          RVector row_norm = R.cwiseAbs2().rowwise().sum();
          double ward = 0.0;
          for (Eigen::Index i = 0; i < N; ++i)
            ward = std::max(ward, std::abs(row_norm(i) - R(i, i).imag() / p.eta) / row_norm(i));
          rows[r].push_back({{"N", double(N)}, {"rep", double(r)}, {"E", E}, {"eta", p.eta}, {"schur_rel_err", rel},
                             {"ward_rel_err", ward}, {"hermitian_defect", hermitian_defect(P)}});
        }
      });
      for (auto& rr : rows)
        for (auto& row : rr) {
          worst = std::max(worst, row["schur_rel_err"]);
          worst_ward = std::max(worst_ward, row["ward_rel_err"]);
          rep.raw.push_back(row);
        }
    }
    rep.scalars["max_schur_rel_err"] = worst;
    rep.scalars["max_ward_rel_err"] = worst_ward;
    rep.scalars["eta"] = p.eta;
    rep.series["E"] = energies;
  } else if (kind == "locallaw") {
    BulkInfo bi = bulk_info(L, p, so);
    double E = std::isnan(p.E) ? bulk_argmax(bi) : p.E;
    rep.scalars["E"] = E;
    rep.scalars["gamma"] = p.gamma;
    rep.scalars["kappa"] = p.kappa;
    std::vector<double> xs, ent, avg, etas_all;
    for (int N : p.N_list) {
      std::vector<double> etas = log_grid(std::pow(double(N), -1.0 + p.gamma), 1.0, p.n_eta);
      std::vector<cplx> m1(etas.size());
      for (std::size_t k = 0; k < etas.size(); ++k) m1[k] = solve_del(L, cplx(E, etas[k]), so).M(0, 0);
      std::vector<std::vector<ResolventErrors>> errs(p.reps);
      parallel_for(p.reps, p.threads, [&](int r) {
        MatrixAssignment s = sample_ensemble(config_for(N), a, b, r);
        Spectrum sp = hermitian_spectrum(model_matrix(q, s), true);
        for (std::size_t k = 0; k < etas.size(); ++k) errs[r].push_back(resolvent_stats(sp, cplx(E, etas[k]), m1[k]));
      });
      for (std::size_t k = 0; k < etas.size(); ++k) {
        std::vector<double> me, ae;
        for (int r = 0; r < p.reps; ++r) {
          me.push_back(errs[r][k].max_entry_err);
          ae.push_back(errs[r][k].avg_err);
          rep.raw.push_back({{"N", double(N)}, {"eta", etas[k]}, {"rep", double(r)},
                             {"max_err", errs[r][k].max_entry_err}, {"avg_err", errs[r][k].avg_err}});
        }
        xs.push_back(std::log(N * etas[k]));
        ent.push_back(median(me));
        avg.push_back(median(ae));
        etas_all.push_back(etas[k]);
      }
    }
    rep.series["eta"] = etas_all;
    rep.series["median_max_entry_err"] = ent;
    rep.series["median_avg_err"] = avg;
    std::vector<double> le, la;
    for (double v : ent) le.push_back(std::log(v));
    for (double v : avg) la.push_back(std::log(v));
    add_fit(rep, "entrywise_vs_N_eta", xs, le);
    add_fit(rep, "averaged_vs_N_eta", xs, la);
  } else if (kind == "speed") {
    NCPolynomial qh = q.beta_star() > 0 ? hermitize(q) : q;
    double mean = limiting_moments(qh, 1).at(1);
    rep.scalars["limit_mean"] = mean;
    std::vector<double> agg, lx, ly;
    for (int N : p.N_list) {
      std::vector<double> e(p.reps);
      parallel_for(p.reps, p.threads, [&](int r) {
        MatrixAssignment s = sample_ensemble(config_for(N), a, b, r);
        cplx tr = model_matrix(q, s).trace();
        e[r] = std::abs(tr.real() / N - mean);
      });
      for (int r = 0; r < p.reps; ++r) rep.raw.push_back({{"N", double(N)}, {"rep", double(r)}, {"err", e[r]}});
      agg.push_back(rms(e));
      lx.push_back(std::log(double(N)));
      ly.push_back(std::log(agg.back()));
    }
    rep.series["rms_err"] = agg;
    add_fit(rep, "err_vs_N", lx, ly);
  } else if (kind == "rigidity" || kind == "deloc") {
    BulkInfo bi = bulk_info(L, p, so);
    std::vector<double> energies = bulk_energies(bi, p.energies);
    std::vector<double> F(energies.size());
    double acc = integrate_density(L, p.E_lo, energies[0], 1e-6, 1e-7, so);
    F[0] = acc;
    for (std::size_t k = 1; k < energies.size(); ++k) {
      acc += integrate_density(L, energies[k - 1], energies[k], 1e-6, 1e-7, so);
      F[k] = acc;
    }
    rep.series["E"] = energies;
    rep.series["cumulative"] = F;
    const bool deloc = kind == "deloc";
    std::vector<double> per_N, lx, ly;
    for (int N : p.N_list) {
      std::vector<int> iota(energies.size());
      for (std::size_t k = 0; k < energies.size(); ++k)
        iota[k] = std::clamp(static_cast<int>(std::ceil(N * F[k])), 1, N);
      std::vector<std::vector<double>> val(p.reps, std::vector<double>(energies.size()));
      parallel_for(p.reps, p.threads, [&](int r) {
        MatrixAssignment s = sample_ensemble(config_for(N), a, b, r);
        Spectrum sp = hermitian_spectrum(model_matrix(q, s), deloc);
        for (std::size_t k = 0; k < energies.size(); ++k) {
          Eigen::Index idx = iota[k] - 1;
          if (!deloc) {
            val[r][k] = std::abs(sp.eigenvalues(idx) - energies[k]);
            continue;
          }
          CVector u = sp.eigenvectors.col(idx);
          double best = u.cwiseAbs().maxCoeff();
          Stream st(p.seed, static_cast<std::uint64_t>(r), 7, static_cast<std::uint64_t>(k) + 1000 * N);
          for (int v = 0; v < p.deloc_vectors; ++v) {
            CVector bvec(N);
            for (Eigen::Index i = 0; i < N; ++i) {
              double x = st.normal(), y = st.normal();
              bvec(i) = cplx(x, y);
            }
            bvec.normalize();
            best = std::max(best, std::abs(bvec.dot(u)));
          }
          val[r][k] = best;
        }
      });
      std::vector<double> med(energies.size());
      for (std::size_t k = 0; k < energies.size(); ++k) {
        std::vector<double> col;
        for (int r = 0; r < p.reps; ++r) {
          col.push_back(val[r][k]);
          rep.raw.push_back({{"N", double(N)}, {"rep", double(r)}, {"E", energies[k]}, {"iota", double(iota[k])},
                             {deloc ? "max_overlap" : "abs_dev", val[r][k]}});
        }
        med[k] = median(col);
      }
      double worst = *std::max_element(med.begin(), med.end());
      rep.series[deloc ? "median_max_overlap_N" + std::to_string(N) : "median_abs_dev_N" + std::to_string(N)] = med;
      per_N.push_back(worst);
      lx.push_back(std::log(double(N)));
      ly.push_back(std::log(worst));
    }
    rep.series[deloc ? "worst_median_max_overlap" : "worst_median_abs_dev"] = per_N;
    if (p.N_list.size() >= 3) add_fit(rep, deloc ? "overlap_vs_N" : "deviation_vs_N", lx, ly);
  } else if (kind == "globaldos") {
    const int N = p.N_list.front();
    std::vector<double> eig;
    std::vector<RVector> ev(p.reps);
    parallel_for(p.reps, p.threads, [&](int r) {
      MatrixAssignment s = sample_ensemble(config_for(N), a, b, r);
      ev[r] = hermitian_spectrum(model_matrix(q, s), false).eigenvalues;
    });
    for (const auto& e : ev) eig.insert(eig.end(), e.data(), e.data() + e.size());
    std::vector<double> edges = linear_grid(p.E_lo, p.E_hi, p.bins + 1);
    std::vector<double> hist(p.bins, 0.0), model(p.bins, 0.0);
    const double w = edges[1] - edges[0];
    for (double x : eig) {
      int k = static_cast<int>(std::floor((x - p.E_lo) / w));
      if (k >= 0 && k < p.bins) hist[k] += 1.0;
    }
    double sup = 0.0;
    for (int k = 0; k < p.bins; ++k) {
      hist[k] /= (double(eig.size()) * w);
      model[k] = integrate_density(L, edges[k], edges[k + 1], 1e-6, 1e-6, so) / w;
      sup = std::max(sup, std::abs(hist[k] - model[k]));
    }
    rep.series["bin_edges"] = edges;
    rep.series["histogram"] = hist;
    rep.series["model"] = model;
    rep.scalars["sup_bin_discrepancy"] = sup;
  } else {
    throw DomainError("unknown experiment kind '" + kind + "'");
  }
  rep.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace ncdel
