#include "ncdel/freeprob.hpp"

#include <cmath>
#include <functional>

namespace ncdel {

std::uint64_t semicircular_word_moment(const std::vector<int>& w) {
  const std::size_t n = w.size();
  if (n % 2) return 0;
  // f[i][j]: pairings of the half-open interval [i, j); the first letter pairs with some k.
  std::vector<std::vector<std::uint64_t>> f(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) f[i][i] = 1;
  for (std::size_t len = 2; len <= n; len += 2) {
    for (std::size_t i = 0; i + len <= n; ++i) {
      std::size_t j = i + len;
      std::uint64_t acc = 0;
      for (std::size_t k = i + 1; k < j; k += 2)
        if (w[i] == w[k]) acc += f[i + 1][k] * f[k + 1][j];
      f[i][j] = acc;
    }
  }
  return f[0][n];
}

std::uint64_t semicircular_word_moment_bruteforce(const std::vector<int>& w) {
  const std::size_t n = w.size();
  if (n % 2) return 0;
  std::vector<int> partner(n, -1);
  std::function<std::uint64_t()> rec = [&]() -> std::uint64_t {
    std::size_t i = 0;
    while (i < n && partner[i] >= 0) ++i;
    if (i == n) {
      for (std::size_t a = 0; a < n; ++a) {
        std::size_t b = static_cast<std::size_t>(partner[a]);
        if (b < a) continue;
        for (std::size_t c = a + 1; c < b; ++c) {
          std::size_t d = static_cast<std::size_t>(partner[c]);
          if (d > b || d < a) return 0;  // crossing
        }
      }
      return 1;
    }
    std::uint64_t total = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (partner[j] >= 0 || w[i] != w[j]) continue;
      partner[i] = static_cast<int>(j);
      partner[j] = static_cast<int>(i);
      total += rec();
      partner[i] = partner[j] = -1;
    }
    return total;
  };
  return rec();
}

std::uint64_t catalan(int n) {
  std::uint64_t c = 1;
  for (int k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
  return c;
}

std::map<int, double> limiting_moments(const NCPolynomial& q, int k_max) {
  if (q.has_general_symbols()) throw DomainError("limiting_moments expects hermitian symbols");
  int deg = std::max(q.degree(), 1);
  if (k_max < 0 || k_max * deg > 20) throw DomainError("limiting_moments size guard: k_max * deg must be <= 20");
  NCPolynomial p = NCPolynomial::constant(1.0, q.alpha_star(), 0) - q;
  std::map<int, double> out;
  NCPolynomial pk = NCPolynomial::constant(1.0, q.alpha_star(), 0);
  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) pk = pk * p;
    cplx acc = 0.0;
    for (const auto& [w, c] : pk.terms()) {
      std::vector<int> labels;
      for (const Symbol& s : w) labels.push_back(s.index);
      std::uint64_t t = semicircular_word_moment(labels);
      if (t) acc += c * static_cast<double>(t);
    }
    out[k] = acc.real();
  }
  return out;
}

namespace {

/// Vector on the full Fock space, stored densely by word length: level[L] has gamma^L entries,
/// word (a_1 ... a_L) at index sum a_i gamma^{L-i}.
struct FockVector {
  std::vector<CVector> level;
};

std::size_t ipow(std::size_t g, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= g;
  return r;
}

/// s_a = l_a + l_a^*: l_a prepends a, l_a^* strips a leading a.
FockVector apply_s(const FockVector& v, int a, std::size_t g, std::size_t max_len) {
  FockVector out;
  std::size_t L = v.level.size();
  std::size_t new_len = std::min(L + 1, max_len + 1);
  out.level.resize(new_len);
  for (std::size_t l = 0; l < new_len; ++l) out.level[l] = CVector::Zero(static_cast<Eigen::Index>(ipow(g, l)));
  for (std::size_t l = 0; l < L; ++l) {
    const CVector& x = v.level[l];
    if (x.size() == 0) continue;
    std::size_t block = ipow(g, l);
    if (l + 1 <= max_len) out.level[l + 1].segment(static_cast<Eigen::Index>(a * block), x.size()) += x;
    if (l >= 1) {
      std::size_t sub = ipow(g, l - 1);
      out.level[l - 1] += x.segment(static_cast<Eigen::Index>(a * sub), static_cast<Eigen::Index>(sub));
    }
  }
  return out;
}

FockVector axpy(const FockVector& x, cplx c, FockVector acc) {
  if (acc.level.size() < x.level.size()) {
    std::size_t old = acc.level.size();
    acc.level.resize(x.level.size());
    for (std::size_t l = old; l < x.level.size(); ++l) acc.level[l] = CVector::Zero(x.level[l].size());
  }
  for (std::size_t l = 0; l < x.level.size(); ++l) acc.level[l] += c * x.level[l];
  return acc;
}

cplx inner(const FockVector& a, const FockVector& b) {
  cplx s = 0.0;
  for (std::size_t l = 0; l < std::min(a.level.size(), b.level.size()); ++l) s += a.level[l].dot(b.level[l]);
  return s;
}

}  // namespace

std::vector<cplx> fock_moments(const NCPolynomial& q, int K) {
  if (q.has_general_symbols()) throw DomainError("fock_moments expects hermitian symbols");
  if (K < 0) throw DomainError("negative moment order");
  const std::size_t g = static_cast<std::size_t>(std::max(q.alpha_star(), 1));
  const int deg = std::max(q.degree(), 1);
  const std::size_t half = static_cast<std::size_t>((K + 1) / 2);
  const std::size_t max_len = half * static_cast<std::size_t>(deg);
  double total = 0.0;
  for (std::size_t l = 0; l <= max_len; ++l) total += std::pow(double(g), double(l));
  if (total > 4e7) throw DomainError("Fock space too large for the requested order");

  NCPolynomial p = NCPolynomial::constant(1.0, q.alpha_star(), 0) - q;
  auto apply_p = [&](const FockVector& v) {
    FockVector out;
    for (const auto& [w, c] : p.terms()) {
      FockVector t = v;
      for (auto it = w.rbegin(); it != w.rend(); ++it) t = apply_s(t, it->index - 1, g, max_len);
      out = axpy(t, c, std::move(out));
    }
    return out;
  };

  std::vector<FockVector> v(half + 1);
  v[0].level.push_back(CVector::Ones(1));
  for (std::size_t j = 1; j <= half; ++j) v[j] = apply_p(v[j - 1]);
  std::vector<cplx> tau(K + 1);
  for (int k = 0; k <= K; ++k) tau[k] = inner(v[k / 2], v[(k + 1) / 2]);
  return tau;
}

cplx stieltjes_tail_oracle(const NCPolynomial& q, cplx z, int D, double tail_tol) {
  if (D < 0) throw DomainError("negative truncation order");
  std::vector<cplx> tau = fock_moments(q, D);
  cplx acc = 0.0, zp = z;
  for (int k = 0; k <= D; ++k, zp *= z) acc -= tau[k] / zp;
  if (std::abs(tau[D] / std::pow(z, D + 1)) > tail_tol)
    throw NumericalError("moment series does not decay at this |z|; increase |z| or D");
  return acc;
}

}  // namespace ncdel
