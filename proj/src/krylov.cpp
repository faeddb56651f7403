#include "ncdel/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ncdel {

namespace {

/// Two passes of classical Gram-Schmidt against the columns of Q.
CVector residual_against(const CMatrix& Q, Eigen::Index cols, const CVector& x) {
  CVector r = x;
  for (int pass = 0; pass < 2; ++pass) {
    if (cols == 0) break;
    auto Qc = Q.leftCols(cols);
    r -= Qc * (Qc.adjoint() * r);
  }
  return r;
}

}  // namespace

KrylovBasis krylov_words(const std::vector<CMatrix>& ops, const CVector& v0, int max_len) {
  const Eigen::Index n = v0.size();
  KrylovBasis kb;
  kb.Q.resize(n, n);
  kb.raw.resize(n, 0);
  kb.rejected_raw.resize(n, 0);
  kb.worst_margin = std::numeric_limits<double>::infinity();
  Eigen::Index cols = 0;

  std::vector<double> op_norm(ops.size());
  for (std::size_t g = 0; g < ops.size(); ++g) op_norm[g] = operator_norm(ops[g]);

  std::vector<CVector> raw;
  auto consider = [&](const std::vector<int>& w, const CVector& x, double scale) {
    CVector r = residual_against(kb.Q, cols, x);
    double res = r.norm();
    double thr = kRankTol * scale;
    if (scale > 0.0 && res > 0.0) {
      double margin = std::abs(std::log10(res / thr));
      kb.worst_margin = std::min(kb.worst_margin, margin);
      if (margin < 1.0) kb.ambiguous = true;
    }
    if (res > thr && cols < n) {
      kb.Q.col(cols++) = r / res;
      kb.words.push_back(w);
      raw.push_back(x);
      return true;
    }
    kb.rejected_words.push_back(w);
    kb.rejected_raw.conservativeResize(n, kb.rejected_raw.cols() + 1);
    kb.rejected_raw.col(kb.rejected_raw.cols() - 1) = x;
    return false;
  };

  if (n == 0 || v0.norm() == 0.0) {
    kb.Q.resize(n, 0);
    return kb;
  }
  consider({}, v0, v0.norm());

  std::size_t level_begin = 0;
  for (int len = 1; len <= max_len && cols < n; ++len) {
    std::size_t level_end = kb.words.size();
    if (level_begin == level_end) break;
    struct Cand {
      std::vector<int> w;
      CVector x;
      double scale;
    };
    std::vector<Cand> cands;
    for (std::size_t j = level_begin; j < level_end; ++j) {
      for (std::size_t g = 0; g < ops.size(); ++g) {
        std::vector<int> w;
        w.reserve(kb.words[j].size() + 1);
        w.push_back(static_cast<int>(g));
        w.insert(w.end(), kb.words[j].begin(), kb.words[j].end());
        cands.push_back({std::move(w), ops[g] * raw[j], op_norm[g] * raw[j].norm()});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.w < b.w; });
    level_begin = level_end;
    for (const Cand& c : cands) consider(c.w, c.x, c.scale);
  }

  kb.Q.conservativeResize(n, cols);
  kb.raw.resize(n, cols);
  for (Eigen::Index j = 0; j < cols; ++j) kb.raw.col(j) = raw[j];
  return kb;
}

CMatrix orthonormal_range(const CMatrix& A, double scale, double tol) {
  if (A.cols() == 0) return CMatrix(A.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  double cut = tol * std::max(scale, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace ncdel
