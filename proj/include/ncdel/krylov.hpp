#pragma once

#include <vector>

#include "ncdel/core.hpp"

namespace ncdel {

inline constexpr double kRankTol = 1e-10;

/// Word-indexed Krylov basis of span{ops_{w1} ... ops_{wk} v0}.
///
/// Words are explored breadth first by length and lexicographically within a length.
/// A candidate ops_g x_w is kept when its residual against the current span exceeds
/// kRankTol * |ops_g| * |x_w|; residuals within a factor 10 of that threshold set `ambiguous`.
struct KrylovBasis {
  CMatrix Q;                             ///< orthonormal columns spanning the space
  CMatrix raw;                           ///< raw word vectors, column j belongs to words[j]
  std::vector<std::vector<int>> words;   ///< 0-based labels, leftmost letter applied last
  std::vector<std::vector<int>> rejected_words;
  CMatrix rejected_raw;
  bool ambiguous = false;
  double worst_margin = 0.0;             ///< log10 distance of the closest residual to the threshold

  Eigen::Index dim() const { return Q.cols(); }
};

/// max_len bounds the word length (the breadth-first search stops earlier once saturated).
KrylovBasis krylov_words(const std::vector<CMatrix>& ops, const CVector& v0, int max_len);

/// Orthonormal basis for the column span of A, dropping singular values below tol * max(scale, s_max).
CMatrix orthonormal_range(const CMatrix& A, double scale, double tol = kRankTol);

}  // namespace ncdel
