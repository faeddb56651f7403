#include "ncdel/del.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

namespace ncdel {

namespace {

struct Problem {
  CMatrix K0;
  std::vector<CMatrix> Kg;
  Eigen::Index m;
};

Problem make_problem(const Linearization& L) {
  if (L.K0.rows() == 0 || L.K0.rows() != L.K0.cols()) throw DomainError("K0 must be square and nonempty");
  Problem p{L.K0, hermitian_coefficients(L), L.K0.rows()};
  for (const auto& K : p.Kg)
    if (K.rows() != p.m || K.cols() != p.m) throw DomainError("pencil coefficient dimension mismatch");
  return p;
}

/// zJ + i eps I - K0 + S[M]
CMatrix shifted_operator(const Problem& p, cplx z, double eps, const CMatrix& M) {
  CMatrix G = apply_superop(p.Kg, M) - p.K0;
  G(0, 0) += z;
  G.diagonal().array() += cplx(0.0, eps);
  return G;
}

double residual_of(const Problem& p, cplx z, double eps, const CMatrix& M) {
  CMatrix F = M * shifted_operator(p, z, eps, M);
  F.diagonal().array() += 1.0;
  return F.norm();
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

bool newton_allowed(const Problem& p) { return p.m <= 24; }

/// Newton on F(M) = I + M G(M), with dF[D] = D G(M) + M S[D].
/// Returns false when the residual stalls before reaching target.
bool newton(const Problem& p, cplx z, double eps, CMatrix& M, double target, int max_steps, int& steps) {
  const Eigen::Index m = p.m, n = m * m;
  double res = residual_of(p, z, eps, M);
  for (int it = 0; it < max_steps && res > target; ++it) {
    CMatrix G = shifted_operator(p, z, eps, M);
    CMatrix F = M * G;
    F.diagonal().array() += 1.0;
    CMatrix Jac = kron(G.transpose(), CMatrix::Identity(m, m));
    for (const auto& K : p.Kg) Jac += kron(K.transpose(), M * K);
    CVector rhs = -Eigen::Map<const CVector>(F.data(), n);
    CVector d = Jac.partialPivLu().solve(rhs);
    if (!d.allFinite()) return false;
    Eigen::Map<const CMatrix> D(d.data(), m, m);
    double step = 1.0, new_res = 0.0;
    CMatrix trial;
    for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
      trial = M + step * D;
      new_res = residual_of(p, z, eps, trial);
      if (new_res < res) break;
    }
    ++steps;
    if (!(new_res < res)) return false;
    M = trial;
    res = new_res;
  }
  return res <= target;
}

/// Damped iteration M <- (1 - a) M + a Phi(M), Phi(M) = -G(M)^{-1}; a halves whenever the residual grows.
double fixed_point(const Problem& p, cplx z, double eps, CMatrix& M, double target, int max_iter, double alpha,
                   int& iters) {
  double res = residual_of(p, z, eps, M);
  for (int it = 0; it < max_iter && res > target; ++it) {
    CMatrix phi = -shifted_operator(p, z, eps, M).partialPivLu().inverse();
    CMatrix next = (1.0 - alpha) * M + alpha * phi;
    double r = residual_of(p, z, eps, next);
    ++iters;
    if (!std::isfinite(r)) break;
    if (r > res) alpha = std::max(alpha * 0.5, 1.0 / 64.0);
    M = std::move(next);
    res = r;
  }
  return res;
}

/// Fixed point to a coarse target, then Newton to `target`, then fixed point again if Newton stalls.
double solve_stage(const Problem& p, cplx z, double eps, CMatrix& M, double target, const SolverOptions& o,
                   DELSolution& sol) {
  const bool use_newton = o.newton && newton_allowed(p);
  double coarse = use_newton ? std::max(target, 1e-3) : target;
  double res = fixed_point(p, z, eps, M, coarse, o.max_iter, o.damping, sol.iterations);
  if (res <= target) return res;
  if (use_newton) {
    CMatrix backup = M;
    if (newton(p, z, eps, M, target, 60, sol.newton_steps)) return residual_of(p, z, eps, M);
    M = backup;
    res = fixed_point(p, z, eps, M, target, o.max_iter, o.damping, sol.iterations);
    if (res > target && newton(p, z, eps, M, target, 60, sol.newton_steps)) res = residual_of(p, z, eps, M);
  }
  return res;
}

void check_positivity(const CMatrix& M, cplx z, double res, int iters) {
  double lo = min_hermitian_eigenvalue(imag_part(M));
  if (lo < -1e-10)
    throw ConvergenceError("solution has negative imaginary part " + std::to_string(lo), z, res, iters, 0.0);
}

}  // namespace

std::vector<CMatrix> hermitian_coefficients(const Linearization& L) {
  return symmetrize(L).K;
}

CMatrix apply_superop(const std::vector<CMatrix>& Kg, const CMatrix& R) {
  CMatrix out = CMatrix::Zero(R.rows(), R.cols());
  for (const auto& K : Kg) out.noalias() += K * R * K;
  return out;
}

CMatrix apply_superop(const Linearization& L, const CMatrix& R) {
  if (R.rows() != L.m() || R.cols() != L.m()) throw DomainError("superoperator argument has wrong size");
  CMatrix out = CMatrix::Zero(R.rows(), R.cols());
  for (const auto& K : L.K) out.noalias() += K * R * K;
  for (const auto& Lb : L.L) {
    out.noalias() += Lb * R * Lb.adjoint();
    out.noalias() += Lb.adjoint() * R * Lb;
  }
  return out;
}

double del_residual(const Linearization& L, cplx z, const CMatrix& M) {
  return residual_of(make_problem(L), z, 0.0, M);
}

DELSolution solve_del(const Linearization& L, cplx z, const SolverOptions& o) {
  if (!(z.imag() > 0.0)) throw DomainError("solve_del needs Im z > 0");
  Problem p = make_problem(L);
  DELSolution sol;
  sol.z = z;
  CMatrix M = cplx(0.0, 1.0) * CMatrix::Identity(p.m, p.m);
  double eps = o.eps0 > 0.0 ? o.eps0 : std::max(1.0, operator_norm(p.K0));
  const double floor = 0.1 * z.imag();
  double res = 0.0;
  while (true) {
    bool last = eps < floor;
    double e = last ? 0.0 : eps;
    double target = last ? o.tol : std::max(o.tol, 1e-9);
    res = solve_stage(p, z, e, M, target, o, sol);
    ++sol.stages;
    if (res > target || !M.allFinite())
      throw ConvergenceError("DEL iteration did not converge", z, res, sol.iterations, e);
    if (last) break;
    eps *= o.eps_factor;
  }
  sol.M = std::move(M);
  sol.residual_norm = res;
  sol.final_regularizer = 0.0;
  check_positivity(sol.M, z, res, sol.iterations);
  return sol;
}

DELSolution solve_del_warm(const Linearization& L, cplx z, const CMatrix& M_start, const SolverOptions& o) {
  if (!(z.imag() > 0.0)) throw DomainError("solve_del needs Im z > 0");
  Problem p = make_problem(L);
  if (o.newton && newton_allowed(p) && M_start.rows() == p.m && M_start.allFinite()) {
    DELSolution sol;
    sol.z = z;
    sol.warm_started = true;
    CMatrix M = M_start;
    if (newton(p, z, 0.0, M, o.tol, 12, sol.newton_steps)) {
      double lo = min_hermitian_eigenvalue(imag_part(M));
      if (lo >= -1e-10 && M(0, 0).imag() > 0.0) {
        sol.M = std::move(M);
        sol.residual_norm = residual_of(p, z, 0.0, sol.M);
        sol.stages = 1;
        return sol;
      }
    }
  }
  return solve_del(L, z, o);
}

std::vector<DELSolution> solve_curve(const Linearization& L, const std::vector<double>& E, double eta,
                                     const SolverOptions& o) {
  if (!(eta > 0.0)) throw DomainError("solve_curve needs eta > 0");
  const std::size_t n = E.size();
  std::vector<DELSolution> out(n);
  constexpr std::size_t kBlock = 16;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failure_block = blocks;
  std::mutex mu;

  auto worker = [&] {
    while (true) {
      std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      std::size_t i = b * kBlock;
      try {
        for (; i < std::min(n, (b + 1) * kBlock); ++i) {
          cplx z(E[i], eta);
          out[i] = (i == b * kBlock) ? solve_del(L, z, o) : solve_del_warm(L, z, out[i - 1].M, o);
        }
      } catch (const ConvergenceError& e) {
        std::lock_guard<std::mutex> lk(mu);
        if (b < failure_block) {
          failure_block = b;
          failure = std::make_exception_ptr(ConvergenceError(
              std::string(e.what()) + " at E = " + std::to_string(E[i]), e.z, e.residual, e.iterations, e.eps));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (b < failure_block) {
          failure_block = b;
          failure = std::current_exception();
        }
      }
    }
  };

  int threads = o.threads > 0 ? o.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(blocks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double density_of_states(const Linearization& L, double E, double eta, bool richardson, const SolverOptions& o) {
  if (!(eta > 0.0)) throw DomainError("density_of_states needs eta > 0");
  double r1 = solve_del(L, cplx(E, eta), o).M(0, 0).imag() / M_PI;
  if (!richardson) return std::max(r1, 0.0);
  double r2 = solve_del(L, cplx(E, eta / 2.0), o).M(0, 0).imag() / M_PI;
  return std::max(2.0 * r2 - r1, 0.0);
}

DensityProfile density_profile(const Linearization& L, const std::vector<double>& grid, double eta,
                               bool richardson, const SolverOptions& o) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("density grid must be increasing");
  DensityProfile prof;
  prof.grid = grid;
  prof.eval_eta = eta;
  prof.richardson = richardson;
  auto s1 = solve_curve(L, grid, eta, o);
  prof.rho.resize(grid.size());
  prof.residual.resize(grid.size());
  std::vector<DELSolution> s2;
  if (richardson) s2 = solve_curve(L, grid, eta / 2.0, o);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double r1 = s1[i].M(0, 0).imag() / M_PI;
    prof.residual[i] = s1[i].residual_norm;
    if (richardson) {
      double r2 = s2[i].M(0, 0).imag() / M_PI;
      prof.rho[i] = std::max(2.0 * r2 - r1, 0.0);
      prof.residual[i] = std::max(prof.residual[i], s2[i].residual_norm);
    } else {
      prof.rho[i] = std::max(r1, 0.0);
    }
  }
  prof.cumulative.assign(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    prof.cumulative[i] = prof.cumulative[i - 1] + 0.5 * (prof.rho[i] + prof.rho[i - 1]) * (grid[i] - grid[i - 1]);
  return prof;
}

double integrate_density(const Linearization& L, double a, double b, double eta, double tol,
                         const SolverOptions& o) {
  if (!(b > a)) throw DomainError("empty integration range");
  struct Node {
    double f;
    CMatrix M;
  };
  /// Each new abscissa is warm started from the solution at the left end of its interval.
  auto eval = [&](double E, const CMatrix* near) {
    DELSolution s = near ? solve_del_warm(L, cplx(E, eta), *near, o) : solve_del(L, cplx(E, eta), o);
    return Node{s.M(0, 0).imag() / M_PI, std::move(s.M)};
  };
  const double width = b - a;
  const double min_h = eta / 4.0;
  std::function<double(double, double, const Node&, const Node&, double, int)> rec =
      [&](double x0, double x1, const Node& n0, const Node& n1, double whole, int depth) -> double {
    double xm = 0.5 * (x0 + x1);
    Node nm = eval(xm, &n0.M);
    double left = 0.5 * (n0.f + nm.f) * (xm - x0), right = 0.5 * (nm.f + n1.f) * (x1 - xm);
    double refined = left + right;
    double share = tol * (x1 - x0) / width;
    if (std::abs(refined - whole) <= 3.0 * share || (x1 - x0) < min_h || depth > 40)
      return refined + (refined - whole) / 3.0;
    return rec(x0, xm, n0, nm, left, depth + 1) + rec(xm, x1, nm, n1, right, depth + 1);
  };
  const int pieces = 64;
  double total = 0.0;
  double x0 = a;
  Node n0 = eval(a, nullptr);
  for (int k = 1; k <= pieces; ++k) {
    double x1 = a + width * k / pieces;
    Node n1 = eval(x1, &n0.M);
    total += rec(x0, x1, n0, n1, 0.5 * (n0.f + n1.f) * (x1 - x0), 0);
    x0 = x1;
    n0 = std::move(n1);
  }
  return total;
}

std::vector<Interval> detect_bulk(const Linearization& L, double kappa, double E_lo, double E_hi, int points,
                                  double eta, const SolverOptions& o) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  if (points < 2 || !(E_hi > E_lo)) throw DomainError("bulk search needs an increasing range and >= 2 points");
  std::vector<double> grid = linear_grid(E_lo, E_hi, points);
  DensityProfile prof = density_profile(L, grid, eta, true, o);
  std::vector<Interval> out;
  bool open = false;
  double start = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool in = prof.rho[i] > kappa && prof.rho[i] < 1.0 / kappa;
    if (in && !open) {
      open = true;
      start = grid[i];
    }
    if (!in && open) {
      out.emplace_back(start, grid[i - 1]);
      open = false;
    }
  }
  if (open) out.emplace_back(start, grid.back());
  return out;
}

CMatrix stability_matrix(const Linearization& L, const CMatrix& M) {
  Problem p = make_problem(L);
  if (M.rows() != p.m || M.cols() != p.m) throw DomainError("M has the wrong size");
  CMatrix A = CMatrix::Identity(p.m * p.m, p.m * p.m);
  for (const auto& K : p.Kg) A -= kron((K * M).transpose(), M * K);
  return A;
}

CMatrix dM_dz(const Linearization& L, const CMatrix& M, cplx) {
  const Eigen::Index m = M.rows();
  CMatrix A = stability_matrix(L, M);
  Eigen::FullPivLU<CMatrix> lu(A);
  if (!lu.isInvertible() || smallest_singular_value(A) < 1e-13 * operator_norm(A))
    throw NumericalError("stability operator is singular");
  CMatrix rhs = M.col(0) * M.row(0);
  CVector x = lu.solve(Eigen::Map<const CVector>(rhs.data(), m * m));
  return Eigen::Map<const CMatrix>(x.data(), m, m);
}

StabilityReport assess_M1_M2(const Linearization& L, const StabilityOptions& s, const SolverOptions& o) {
  StabilityReport rep;
  rep.kappa = s.kappa;
  rep.threshold = s.threshold;
  std::vector<double> etas = s.eta_grid.empty() ? log_grid(1e-6, 1e2, 17) : s.eta_grid;
  std::sort(etas.begin(), etas.end(), std::greater<>());
  rep.bulk_intervals = detect_bulk(L, s.kappa, s.E_lo, s.E_hi, s.bulk_grid_points, s.density_eta, o);
  for (const auto& [lo, hi] : rep.bulk_intervals) {
    int k = lo == hi ? 1 : s.energies_per_interval;
    for (double E : linear_grid(lo, hi, k)) {
      CMatrix prev;
      for (double eta : etas) {
        try {
          DELSolution sol = prev.size() ? solve_del_warm(L, cplx(E, eta), prev, o) : solve_del(L, cplx(E, eta), o);
          prev = sol.M;
          StabilityRow row{E, eta, operator_norm(sol.M), smallest_singular_value(stability_matrix(L, sol.M))};
          rep.table.push_back(row);
          rep.sup_M_norm = std::max(rep.sup_M_norm, row.M_norm);
          double inv = row.sigma_min > 0.0 ? 1.0 / row.sigma_min : INFINITY;
          rep.sup_Linv_norm = std::max(rep.sup_Linv_norm, inv);
        } catch (const NumericalError& e) {
          rep.failures.push_back("E=" + std::to_string(E) + " eta=" + std::to_string(eta) + ": " + e.what());
        }
      }
    }
  }
  rep.pass = rep.failures.empty() && !rep.table.empty() && std::isfinite(rep.sup_M_norm) &&
             std::isfinite(rep.sup_Linv_norm) && rep.sup_M_norm <= s.threshold && rep.sup_Linv_norm <= s.threshold;
  return rep;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || hi < lo) throw DomainError("invalid log grid");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 1) throw DomainError("invalid grid size");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

}  // namespace ncdel
