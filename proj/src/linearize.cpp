#include "ncdel/linearize.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "ncdel/krylov.hpp"

namespace ncdel {

namespace {

const double kSqrt2 = std::sqrt(2.0);

CMatrix hermitian_part(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

std::vector<int> labels_of(const Word& w) {
  std::vector<int> out;
  out.reserve(w.size());
  for (const Symbol& s : w) {
    if (s.kind != SymbolKind::HermitianX) throw DomainError("expected hermitian symbols only");
    out.push_back(s.index - 1);
  }
  return out;
}

CMatrix inverse_checked(const CMatrix& K0) {
  if (K0.rows() == 0) throw DomainError("empty pencil");
  Eigen::JacobiSVD<CMatrix> svd(K0);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-12 * s(0))) throw NumericalError("K0 is singular");
  return K0.partialPivLu().inverse();
}

CVector unit_vector(Eigen::Index m, Eigen::Index i = 0) {
  CVector e = CVector::Zero(m);
  e(i) = 1.0;
  return e;
}

void check_pencil(const SymmetrizedLinearization& L) {
  const Eigen::Index m = L.m();
  if (L.K0.cols() != m) throw DomainError("K0 must be square");
  for (const auto& K : L.K)
    if (K.rows() != m || K.cols() != m) throw DomainError("pencil coefficient dimension mismatch");
}

/// Automaton for sum_k q^k: states are the empty word and all nonempty suffixes of monomials.
struct SeriesAutomaton {
  std::vector<CMatrix> V;
  Eigen::Index states = 0;
};

SeriesAutomaton series_automaton(const NCPolynomial& qh, int gamma) {
  std::map<std::vector<int>, Eigen::Index> index;
  index[{}] = 0;
  std::map<std::vector<int>, cplx> mono;
  for (const auto& [w, c] : qh.terms()) {
    std::vector<int> l = labels_of(w);
    mono[l] = c;
    for (std::size_t s = 0; s < l.size(); ++s) {
      std::vector<int> suf(l.begin() + static_cast<long>(s), l.end());
      index.try_emplace(suf, 0);
    }
  }
  Eigen::Index k = 0;
  for (auto& [w, i] : index) i = k++;
  SeriesAutomaton a;
  a.states = k;
  a.V.assign(gamma, CMatrix::Zero(k, k));
  for (const auto& [sigma, si] : index) {
    for (int g = 0; g < gamma; ++g) {
      std::vector<int> t;
      t.reserve(sigma.size() + 1);
      t.push_back(g);
      t.insert(t.end(), sigma.begin(), sigma.end());
      auto it = index.find(t);
      if (it != index.end()) a.V[g](it->second, si) += 1.0;
      auto mt = mono.find(t);
      if (mt != mono.end()) a.V[g](0, si) += mt->second;
    }
  }
  return a;
}

}  // namespace

SymmetrizedLinearization symmetrize(const Linearization& L) {
  SymmetrizedLinearization S;
  S.K0 = hermitian_part(L.K0);
  S.offset = L.offset;
  for (const auto& K : L.K) S.K.push_back(hermitian_part(K));
  for (const auto& Lb : L.L) S.K.push_back((Lb + Lb.adjoint()) * (kSqrt2 / 2.0));
  for (const auto& Lb : L.L) {
    CMatrix im = (Lb - Lb.adjoint()) / cplx(0.0, 2.0);
    S.K.push_back(hermitian_part(-kSqrt2 * im));
  }
  return S;
}

Linearization split_variables(const SymmetrizedLinearization& S, int alpha_star, int beta_star) {
  if (alpha_star < 0 || beta_star < 0 || alpha_star + 2 * beta_star != S.gamma_star())
    throw DomainError("alphabet sizes do not match the symmetrized pencil");
  Linearization L;
  L.K0 = S.K0;
  L.offset = S.offset;
  for (int a = 0; a < alpha_star; ++a) L.K.push_back(S.K[a]);
  for (int b = 0; b < beta_star; ++b)
    L.L.push_back((S.K[alpha_star + b] - cplx(0.0, 1.0) * S.K[alpha_star + beta_star + b]) / kSqrt2);
  return L;
}

Linearization as_linearization(const SymmetrizedLinearization& S) {
  return split_variables(S, S.gamma_star(), 0);
}

SymmetrizedLinearization standard_linearization(const NCPolynomial& q) {
  if (q.has_general_symbols()) throw DomainError("standard_linearization expects hermitian symbols only");
  if (q.constant_term() != cplx(0.0)) throw DomainError("standard_linearization expects q(0) = 0");
  double cmax = 0.0, defect = 0.0;
  for (const auto& [w, c] : q.terms()) cmax = std::max(cmax, std::abs(c));
  NCPolynomial qa = adjoint(q);
  for (const auto& [w, c] : q.terms()) defect = std::max(defect, std::abs(c - qa.coefficient(w)));
  if (defect > 1e-12 * cmax) throw DomainError("standard_linearization expects a self-adjoint polynomial");

  const int gamma = q.alpha_star();
  Eigen::Index n = 0;
  for (const auto& [w, c] : q.terms())
    if (w.size() >= 2) n += static_cast<Eigen::Index>(w.size()) - 1;
  const Eigen::Index m = 1 + 2 * n;

  SymmetrizedLinearization S;
  S.K0 = CMatrix::Zero(m, m);
  S.K.assign(gamma, CMatrix::Zero(m, m));
  S.K0(0, 0) = 1.0;

  // Pencil entries are K0 - sum K_g x_g, so an entry c * x_g contributes -c to K_g.
  auto put_x = [&](Eigen::Index r, Eigen::Index c, int label, cplx v) {
    S.K[label](r, c) -= v;
    if (r != c) S.K[label](c, r) -= std::conj(v);
  };
  auto put_const = [&](Eigen::Index r, Eigen::Index c, cplx v) {
    S.K0(r, c) += v;
    if (r != c) S.K0(c, r) += std::conj(v);
  };

  Eigen::Index off = 0;
  for (const auto& [w, c] : q.terms()) {
    std::vector<int> l = labels_of(w);
    if (l.size() == 1) {
      S.K[l[0]](0, 0) += c.real();  // lambda = 1 - q_1
      continue;
    }
    const Eigen::Index k = static_cast<Eigen::Index>(l.size());
    const Eigen::Index s = k - 1;
    const cplx zeta = -c / 2.0;
    const double sq = std::sqrt(std::abs(zeta));
    const cplx phase = std::abs(zeta) / zeta;
    const Eigen::Index dcol = 1 + off, brow = 1 + n + off;

    // d = (0, ..., 0, x_{a1}) on the first row, b = (0, ..., 0, x_{ak})^t on the first column.
    put_x(0, dcol + s - 1, l[0], sq);
    put_x(brow + s - 1, 0, l[k - 1], sq);
    // Rows r of U carry x_{a_{r+2}} at column k-3-r and -1 at column k-2-r.
    for (Eigen::Index r = 0; r < s; ++r) {
      Eigen::Index cx = k - 3 - r, cm = k - 2 - r;
      if (cx >= 0) put_x(brow + r, dcol + cx, l[r + 1], phase);
      put_const(brow + r, dcol + cm, -phase);
    }
    off += s;
  }
  return S;
}

std::vector<CMatrix> coefficient_operators(const SymmetrizedLinearization& L) {
  CMatrix K0inv = inverse_checked(L.K0);
  std::vector<CMatrix> A;
  A.reserve(L.K.size());
  for (const auto& K : L.K) A.push_back(K * K0inv);
  return A;
}

cplx realization_coefficient(const SymmetrizedLinearization& L, const std::vector<int>& w) {
  check_pencil(L);
  CMatrix K0inv = inverse_checked(L.K0);
  CVector x = unit_vector(L.m());
  for (auto it = w.rbegin(); it != w.rend(); ++it) x = L.K[*it] * (K0inv * x);
  return K0inv.col(0).dot(x);
}

SymmetrizedLinearization minimal_linearization(const SymmetrizedLinearization& L, MinimizationInfo* info) {
  check_pencil(L);
  const Eigen::Index m = L.m();
  const int gamma = L.gamma_star();
  CMatrix K0inv = inverse_checked(L.K0);
  std::vector<CMatrix> A = coefficient_operators(L);

  KrylovBasis right = krylov_words(A, unit_vector(m), static_cast<int>(m));
  if (right.ambiguous) throw RankAmbiguityError("rank ambiguous while building the reachable space");
  CMatrix P = right.Q * right.Q.adjoint();

  std::vector<CMatrix> Ap;
  for (const auto& a : A) Ap.push_back(P * a.adjoint() * P);
  CVector l0 = P * K0inv.col(0);
  KrylovBasis left = krylov_words(Ap, l0, static_cast<int>(m));
  if (left.ambiguous) throw RankAmbiguityError("rank ambiguous while building the observable space");

  const Eigen::Index r = left.dim();
  if (r == 0 || !left.words.front().empty()) throw NumericalError("observable space misses the empty word");
  CMatrix Xi(m, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    CVector x = K0inv.col(0);
    const auto& w = left.words[i];
    for (auto it = w.rbegin(); it != w.rend(); ++it) x = A[*it].adjoint() * x;
    Xi.col(i) = x;
  }

  CMatrix H0 = hermitian_part(Xi.adjoint() * L.K0 * Xi);
  std::vector<CMatrix> Hg;
  for (const auto& K : L.K) Hg.push_back(hermitian_part(Xi.adjoint() * K * Xi));

  CVector v = H0.col(0);
  const double c = v.squaredNorm();
  if (!(c > 0.0)) throw NumericalError("degenerate reduced pencil");
  v /= std::sqrt(c);
  const cplx phase = std::abs(v(0)) > 0.0 ? v(0) / std::abs(v(0)) : cplx(1.0);
  CVector t = std::conj(phase) * v;
  CVector h = unit_vector(r) - t;
  CMatrix W = CMatrix::Identity(r, r);
  if (h.norm() > 0.0) W -= 2.0 * h * h.adjoint() / h.squaredNorm();
  W *= phase;

  SymmetrizedLinearization out;
  out.offset = L.offset;
  out.K0 = hermitian_part(W.adjoint() * H0 * W / c);
  for (int g = 0; g < gamma; ++g) out.K.push_back(hermitian_part(W.adjoint() * Hg[g] * W / c));

  if (info) {
    info->dim_U = static_cast<int>(right.dim());
    info->dim_U_tilde = static_cast<int>(r);
    info->basis_words = left.words;
  }
  return out;
}

VerificationReport verify_linearization(const SymmetrizedLinearization& L, const NCPolynomial& q, int D,
                                        double tol) {
  check_pencil(L);
  NCPolynomial qh = q.has_general_symbols() || q.beta_star() > 0 ? hermitize(q) : q;
  const int gamma = qh.alpha_star();
  if (gamma != L.gamma_star()) throw DomainError("pencil alphabet does not match the polynomial");
  if (qh.constant_term() != cplx(0.0)) throw DomainError("verify_linearization expects q(0) = 0");
  const Eigen::Index m = L.m();
  if (D < 0) D = static_cast<int>(2 * m);

  VerificationReport rep;
  CMatrix K0inv = inverse_checked(L.K0);
  std::vector<CMatrix> A;
  for (const auto& K : L.K) A.push_back(K * K0inv);
  const CVector u = K0inv.col(0);

  /// Errors are absolute for coefficients of modulus <= 1 and relative above.
  auto record = [&](const std::vector<int>& w, double diff, double reference) {
    const double err = diff / std::max(1.0, std::abs(reference));
    ++rep.words_checked;
    rep.max_coeff_err = std::max(rep.max_coeff_err, err);
    if (err > tol) {
      if (!rep.first_mismatch || WordLess{}(x_word(w), x_word(*rep.first_mismatch))) rep.first_mismatch = w;
    }
  };

  // Exhaustive enumeration when the word count stays moderate.
  double total = 0.0, p = 1.0;
  for (int k = 0; k <= D; ++k, p *= gamma) total += p;
  if (total <= 2e5) {
    rep.method = "exhaustive";
    SeriesCoefficients s = inverse_series(qh, D);
    std::vector<int> rev;  // the word read right to left
    std::function<void(const CVector&)> dfs = [&](const CVector& x) {
      std::vector<int> w(rev.rbegin(), rev.rend());
      std::vector<int> lab(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) lab[i] = w[i] + 1;
      const cplx ref = s.at(x_word(lab));
      record(w, std::abs(u.dot(x) - ref), std::abs(ref));
      if (static_cast<int>(rev.size()) == D) return;
      for (int g = 0; g < gamma; ++g) {
        rev.push_back(g);
        dfs(A[g] * x);
        rev.pop_back();
      }
    };
    dfs(unit_vector(m));
  } else {
    rep.method = "krylov";
    SeriesAutomaton aut = series_automaton(qh, gamma);
    const Eigen::Index n = m + aut.states;
    std::vector<CMatrix> ops;
    for (int g = 0; g < gamma; ++g) {
      CMatrix B = CMatrix::Zero(n, n);
      B.topLeftCorner(m, m) = A[g];
      B.bottomRightCorner(aut.states, aut.states) = aut.V[g];
      ops.push_back(B);
    }
    CVector v = CVector::Zero(n), uu = CVector::Zero(n);
    v(0) = 1.0;
    v(m) = 1.0;
    uu.head(m) = u;
    uu(m) = -1.0;
    KrylovBasis kb = krylov_words(ops, v, D);
    for (Eigen::Index j = 0; j < kb.dim(); ++j)
      record(kb.words[j], std::abs(uu.dot(kb.raw.col(j))), std::abs(kb.raw(m, j)));
    for (Eigen::Index j = 0; j < kb.rejected_raw.cols(); ++j)
      record(kb.rejected_words[j], std::abs(uu.dot(kb.rejected_raw.col(j))), std::abs(kb.rejected_raw(m, j)));
  }
  rep.pass = rep.max_coeff_err <= tol;
  return rep;
}

NilpotencyReport check_nilpotency(const SymmetrizedLinearization& L) {
  check_pencil(L);
  NilpotencyReport rep;
  const Eigen::Index m = L.m();
  CMatrix K0inv;
  try {
    K0inv = inverse_checked(L.K0);
  } catch (const NumericalError&) {
    return rep;
  }
  rep.K0_invertible = true;
  rep.normalized = std::abs(K0inv(0, 0) - 1.0) <= 1e-12;

  CMatrix pi = CMatrix::Zero(m, m);
  pi.row(0) = K0inv.row(0);
  CMatrix pip = CMatrix::Identity(m, m) - pi;
  std::vector<CMatrix> B;
  double scale = 0.0;
  /// Rank decisions are relative to the uncompressed operators, so a compressed family that
  /// vanishes up to round-off has rank zero.
  for (const auto& K : L.K) {
    CMatrix A = K * K0inv;
    scale = std::max(scale, operator_norm(A));
    B.push_back(pip * A * pip);
  }

  CMatrix W = CMatrix::Identity(m, m);
  rep.chain_dims.push_back(static_cast<int>(m));
  for (int k = 1; k <= m; ++k) {
    CMatrix stacked(m, W.cols() * static_cast<Eigen::Index>(B.size()));
    for (std::size_t g = 0; g < B.size(); ++g) stacked.middleCols(g * W.cols(), W.cols()) = B[g] * W;
    W = orthonormal_range(stacked, scale);
    rep.chain_dims.push_back(static_cast<int>(W.cols()));
    if (W.cols() == 0) {
      rep.index = k;
      break;
    }
    if (rep.chain_dims[k] == rep.chain_dims[k - 1]) break;  // stabilized: not nilpotent
  }
  return rep;
}

MinimalityReport minimality_report(const SymmetrizedLinearization& L) {
  check_pencil(L);
  MinimalityReport rep;
  const Eigen::Index m = L.m();
  CMatrix K0inv = inverse_checked(L.K0);
  std::vector<CMatrix> A = coefficient_operators(L), As;
  for (const auto& a : A) As.push_back(a.adjoint());
  KrylovBasis r = krylov_words(A, unit_vector(m), static_cast<int>(m));
  KrylovBasis l = krylov_words(As, K0inv.col(0), static_cast<int>(m));
  rep.rank_right = static_cast<int>(r.dim());
  rep.rank_left = static_cast<int>(l.dim());
  rep.ambiguous = r.ambiguous || l.ambiguous;
  rep.minimal = rep.rank_right == m && rep.rank_left == m;
  return rep;
}

bool check_minimality(const SymmetrizedLinearization& L) { return minimality_report(L).minimal; }

}  // namespace ncdel

namespace ncdel {

PencilBuild linearize_polynomial(const NCPolynomial& p, bool minimize) {
  ShiftedPolynomial sp = shift_to_q(p);
  PencilBuild out;
  out.q = sp.q;
  NCPolynomial qh = sp.q.beta_star() > 0 ? hermitize(sp.q) : sp.q;
  out.standard = standard_linearization(qh);
  out.standard.offset = sp.offset;
  out.symmetrized = minimize ? minimal_linearization(out.standard) : out.standard;
  out.symmetrized.offset = sp.offset;
  out.pencil = split_variables(out.symmetrized, p.alpha_star(), p.beta_star());
  return out;
}

}  // namespace ncdel
