#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncdel/core.hpp"
#include "ncdel/linearize.hpp"

namespace ncdel {

struct SolverOptions {
  double tol = 1e-11;         ///< Frobenius norm of I + M(zJ - K0) + M S[M]
  int max_iter = 10000;       ///< fixed-point iterations per homotopy stage
  double damping = 0.5;
  double eps_factor = 0.5;    ///< geometric step of the regularizer
  double eps0 = -1.0;         ///< starting regularizer, negative selects max(1, |K0|)
  bool newton = true;         ///< quadratic polish after the fixed point
  int threads = 0;            ///< 0 selects all hardware threads
};

struct DELSolution {
  cplx z;
  CMatrix M;
  double residual_norm = 0.0;
  int iterations = 0;          ///< fixed-point iterations summed over stages
  int newton_steps = 0;
  int stages = 0;
  double final_regularizer = 0.0;
  bool warm_started = false;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, cplx z, double residual, int iterations, double eps)
      : NumericalError(what), z(z), residual(residual), iterations(iterations), eps(eps) {}
  cplx z;
  double residual;
  int iterations;
  double eps;
};

/// Self-adjoint coefficient list K_g of the pencil, with the general symbols split.
std::vector<CMatrix> hermitian_coefficients(const Linearization& L);

CMatrix apply_superop(const Linearization& L, const CMatrix& R);
CMatrix apply_superop(const std::vector<CMatrix>& Kg, const CMatrix& R);

double del_residual(const Linearization& L, cplx z, const CMatrix& M);

DELSolution solve_del(const Linearization& L, cplx z, const SolverOptions& opts = {});
/// Newton from a nearby solution; falls back to the full homotopy if that fails.
DELSolution solve_del_warm(const Linearization& L, cplx z, const CMatrix& M_start,
                           const SolverOptions& opts = {});

/// Points keep the input order. Warm-start chains are fixed blocks so results do not depend on threads.
std::vector<DELSolution> solve_curve(const Linearization& L, const std::vector<double>& E, double eta,
                                     const SolverOptions& opts = {});

double density_of_states(const Linearization& L, double E, double eta, bool richardson = false,
                         const SolverOptions& opts = {});

struct DensityProfile {
  std::vector<double> grid;
  std::vector<double> rho;
  std::vector<double> residual;
  std::vector<double> cumulative;  ///< trapezoid integral of rho from grid.front()
  double eval_eta = 0.0;
  bool richardson = false;
};

DensityProfile density_profile(const Linearization& L, const std::vector<double>& grid, double eta,
                               bool richardson = false, const SolverOptions& opts = {});

/// Integral of rho over [a, b] by adaptive trapezoid refinement; resolves 1/sqrt edges down to ~eta.
double integrate_density(const Linearization& L, double a, double b, double eta, double tol = 1e-5,
                         const SolverOptions& opts = {});

using Interval = std::pair<double, double>;

/// Maximal runs of grid points with kappa < rho < 1/kappa on `points` equispaced energies. The
/// density is Richardson extrapolated in eta so that smoothing near singularities stays out of the bulk.
std::vector<Interval> detect_bulk(const Linearization& L, double kappa, double E_lo, double E_hi,
                                  int points = 401, double eta = 1e-5, const SolverOptions& opts = {});

/// Matrix of R -> R - M S[R] M acting on column-major vec(R).
CMatrix stability_matrix(const Linearization& L, const CMatrix& M);

/// Solves R - M S[R] M = M J M.
CMatrix dM_dz(const Linearization& L, const CMatrix& M, cplx z);

struct StabilityRow {
  double E, eta, M_norm, sigma_min;
};

struct StabilityReport {
  double kappa = 0.0;
  std::vector<Interval> bulk_intervals;
  double sup_M_norm = 0.0;
  double sup_Linv_norm = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::vector<StabilityRow> table;
  std::vector<std::string> failures;
};

struct StabilityOptions {
  double kappa = 0.05;
  double E_lo = -4.0, E_hi = 4.0;
  int bulk_grid_points = 401;
  int energies_per_interval = 8;
  std::vector<double> eta_grid;    ///< empty selects 17 log-spaced values over [1e-6, 1e2]
  double threshold = 1e3;          ///< bound for both sups
  double density_eta = 1e-5;
};

StabilityReport assess_M1_M2(const Linearization& L, const StabilityOptions& sopts,
                             const SolverOptions& opts = {});

std::vector<double> log_grid(double lo, double hi, int n);
std::vector<double> linear_grid(double lo, double hi, int n);

}  // namespace ncdel
