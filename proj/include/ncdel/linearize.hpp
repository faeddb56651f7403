#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncdel/core.hpp"
#include "ncdel/ncpoly.hpp"

namespace ncdel {

/// Pencil K0 - sum K_a x_a - sum (L_b y_b + L_b^* y_b^*) with hermitian K0 and K_a.
struct Linearization {
  CMatrix K0;
  std::vector<CMatrix> K;  ///< alpha* hermitian matrices
  std::vector<CMatrix> L;  ///< beta* general matrices
  double offset = 1.0;     ///< constant c of the source polynomial p = c - q

  Eigen::Index m() const { return K0.rows(); }
  int alpha_star() const { return static_cast<int>(K.size()); }
  int beta_star() const { return static_cast<int>(L.size()); }
};

/// Same pencil written over gamma* = alpha* + 2 beta* hermitian symbols.
struct SymmetrizedLinearization {
  CMatrix K0;
  std::vector<CMatrix> K;
  double offset = 1.0;

  Eigen::Index m() const { return K0.rows(); }
  int gamma_star() const { return static_cast<int>(K.size()); }
};

SymmetrizedLinearization symmetrize(const Linearization& L);
Linearization split_variables(const SymmetrizedLinearization& S, int alpha_star, int beta_star);
/// Views a symmetrized pencil as one with beta* = 0.
Linearization as_linearization(const SymmetrizedLinearization& S);

/// Standard construction for a self-adjoint q over hermitian symbols with q(0) = 0.
SymmetrizedLinearization standard_linearization(const NCPolynomial& q_tilde);

struct MinimizationInfo {
  int dim_U = 0;
  int dim_U_tilde = 0;
  std::vector<std::vector<int>> basis_words;  ///< word labels beta_i, 0-based, beta_1 empty
};

/// Reduces to the dimension of the rank of the Hankel matrix.
/// Throws RankAmbiguityError when a Krylov residual lies within a factor 10 of the rank threshold.
SymmetrizedLinearization minimal_linearization(const SymmetrizedLinearization& L,
                                               MinimizationInfo* info = nullptr);

struct VerificationReport {
  bool pass = false;
  double max_coeff_err = 0.0;  ///< max |a - b| / max(1, |b|) over checked words
  std::optional<std::vector<int>> first_mismatch;  ///< 0-based labels of the first failing word
  std::string method;                              ///< "exhaustive" or "krylov"
  long long words_checked = 0;
};

/// Compares the pencil's word coefficients with the series of (1 - hermitize(q))^{-1}.
/// D < 0 selects 2m.
VerificationReport verify_linearization(const SymmetrizedLinearization& L, const NCPolynomial& q,
                                        int D = -1, double tol = 1e-10);

struct NilpotencyReport {
  bool K0_invertible = false;
  bool normalized = false;  ///< <e1, K0^{-1} e1> = 1
  std::optional<int> index;
  std::vector<int> chain_dims;

  bool nilpotent() const { return K0_invertible && normalized && index.has_value(); }
};

NilpotencyReport check_nilpotency(const SymmetrizedLinearization& L);

struct MinimalityReport {
  int rank_right = 0;  ///< span{A_w e1}
  int rank_left = 0;   ///< span{A_w^* K0^{-1} e1}
  bool ambiguous = false;
  bool minimal = false;
};

MinimalityReport minimality_report(const SymmetrizedLinearization& L);
bool check_minimality(const SymmetrizedLinearization& L);

struct PencilBuild {
  NCPolynomial q{0, 0};                 ///< q = c - p with q(0) = 0
  SymmetrizedLinearization standard;
  SymmetrizedLinearization symmetrized;  ///< minimized when requested, otherwise the standard pencil
  Linearization pencil;                  ///< symmetrized split back to the y symbols, offset = c
};

/// Full pipeline for a self-adjoint p: shift, hermitize, standard construction, optional minimization.
PencilBuild linearize_polynomial(const NCPolynomial& p, bool minimize = true);

/// Realization coefficient <K0^{-1} e1, A_{w1} ... A_{wk} e1>.
cplx realization_coefficient(const SymmetrizedLinearization& L, const std::vector<int>& w);

/// A_g = K_g K0^{-1}
std::vector<CMatrix> coefficient_operators(const SymmetrizedLinearization& L);

}  // namespace ncdel
