#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ncdel/core.hpp"
#include "ncdel/linearize.hpp"
#include "ncdel/ncpoly.hpp"

namespace ncdel {

enum class EntryLaw { ComplexGaussian, RealGaussian, Bernoulli };

EntryLaw parse_law(const std::string& s);
std::string law_name(EntryLaw law);

struct EnsembleConfig {
  int N = 100;
  EntryLaw law_x = EntryLaw::ComplexGaussian;
  EntryLaw law_y = EntryLaw::ComplexGaussian;
  std::uint64_t seed = 1;
  int replicas = 1;
};

/// Hermitian X_a with variance 1/N entries (real diagonal) and fully independent Y_b, drawn from
/// streams keyed by (seed, replica, symbol).
MatrixAssignment sample_ensemble(const EnsembleConfig& cfg, int alpha_star, int beta_star, int replica);

struct LinearizedMatrix {
  CMatrix H;
  Eigen::Index m = 0;
  Eigen::Index N = 0;
};

/// H = K0 (x) I - sum K_a (x) X_a - sum (L_b (x) Y_b + L_b^* (x) Y_b^*), block (k, l) of size N.
LinearizedMatrix build_linearized_matrix(const Linearization& L, const MatrixAssignment& a);

struct GeneralizedResolvent {
  CMatrix G11;                    ///< top-left N x N block
  std::vector<CMatrix> diagonal;  ///< per-site m x m slices, filled only when requested
};

GeneralizedResolvent generalized_resolvent_block(const LinearizedMatrix& H, cplx z, bool site_slices = false);

struct ResolventErrors {
  double max_entry_err = 0.0;
  double avg_err = 0.0;
};

/// Spectral decomposition of a hermitian matrix, kept for repeated resolvent evaluation.
struct Spectrum {
  RVector eigenvalues;  ///< ascending
  CMatrix eigenvectors;
};

Spectrum hermitian_spectrum(const CMatrix& P, bool vectors = true);
CMatrix resolvent(const Spectrum& s, cplx z);
ResolventErrors resolvent_stats(const CMatrix& P, cplx z, cplx m1);
ResolventErrors resolvent_stats(const Spectrum& s, cplx z, cplx m1);

struct FitResult {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  int points = 0;
};

/// Least squares y = a + b x.
FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ExperimentParams {
  std::string kind;
  std::vector<int> N_list{500};
  int reps = 5;
  std::uint64_t seed = 1;
  double gamma = 0.1;
  double kappa = 0.05;
  int n_eta = 8;
  double E = std::numeric_limits<double>::quiet_NaN();  ///< NaN selects the bulk density maximum
  double eta = 0.5;                                      ///< spectral height for schur
  int energies = 10;
  int deloc_vectors = 20;
  int bins = 40;
  double E_lo = -4.0, E_hi = 4.0;
  int bulk_grid_points = 401;
  EntryLaw law = EntryLaw::ComplexGaussian;
  int threads = 0;
};

struct ExperimentReport {
  std::string kind;
  std::uint64_t seed = 0;
  int reps = 0;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> series;
  std::map<std::string, FitResult> fits;
  std::vector<std::map<std::string, double>> raw;  ///< per-replica rows
  double wall_clock_s = 0.0;
};

/// kinds: schur, locallaw, rigidity, deloc, speed, globaldos. Energies are in the internal
/// coordinates of 1 - q; q must be the polynomial linearized by L.
ExperimentReport run_experiment(const std::string& kind, const Linearization& L, const NCPolynomial& q,
                                const ExperimentParams& params);

}  // namespace ncdel
