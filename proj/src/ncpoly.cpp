#include "ncdel/ncpoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ncdel {

Symbol Symbol::involution() const {
  switch (kind) {
    case SymbolKind::GeneralY: return ystar(index);
    case SymbolKind::AdjointY: return y(index);
    default: return *this;
  }
}

Word x_word(const std::vector<int>& labels) {
  Word w;
  w.reserve(labels.size());
  for (int l : labels) w.push_back(Symbol::x(l));
  return w;
}

std::string format_word(const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += "*";
    s += (w[i].kind == SymbolKind::HermitianX ? "x" : "y") + std::to_string(w[i].index);
    if (w[i].kind == SymbolKind::AdjointY) s += "'";
  }
  return s;
}

NCPolynomial NCPolynomial::constant(cplx c, int alpha_star, int beta_star) {
  NCPolynomial p(alpha_star, beta_star);
  p.add_term({}, c);
  return p;
}

NCPolynomial NCPolynomial::monomial(const Word& w, cplx c, int alpha_star, int beta_star) {
  NCPolynomial p(alpha_star, beta_star);
  p.add_term(w, c);
  return p;
}

void NCPolynomial::add_term(const Word& w, cplx c) {
  if (c == cplx(0.0)) return;
  for (const Symbol& s : w) {
    int bound = s.kind == SymbolKind::HermitianX ? alpha_star_ : beta_star_;
    if (s.index < 1 || s.index > bound)
      throw DomainError("symbol " + format_word({s}) + " outside the declared alphabet");
  }
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }
}

cplx NCPolynomial::coefficient(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

int NCPolynomial::degree() const {
  if (terms_.empty()) return -1;
  return static_cast<int>(terms_.rbegin()->first.size());
}

bool NCPolynomial::has_general_symbols() const {
  for (const auto& [w, c] : terms_)
    for (const Symbol& s : w)
      if (s.kind != SymbolKind::HermitianX) return true;
  return false;
}

bool NCPolynomial::operator==(const NCPolynomial& o) const {
  return alpha_star_ == o.alpha_star_ && beta_star_ == o.beta_star_ && terms_ == o.terms_;
}

void NCPolynomial::check_alphabet(const NCPolynomial& o) const {
  if (alpha_star_ != o.alpha_star_ || beta_star_ != o.beta_star_)
    throw DomainError("polynomials over different alphabets");
}

NCPolynomial NCPolynomial::operator+(const NCPolynomial& o) const {
  check_alphabet(o);
  NCPolynomial r = *this;
  for (const auto& [w, c] : o.terms_) r.add_term(w, c);
  return r;
}

NCPolynomial NCPolynomial::operator-(const NCPolynomial& o) const { return *this + o * cplx(-1.0); }

NCPolynomial NCPolynomial::operator*(const NCPolynomial& o) const {
  check_alphabet(o);
  NCPolynomial r(alpha_star_, beta_star_);
  for (const auto& [w1, c1] : terms_) {
    for (const auto& [w2, c2] : o.terms_) {
      Word w = w1;
      w.insert(w.end(), w2.begin(), w2.end());
      r.add_term(w, c1 * c2);
    }
  }
  return r;
}

NCPolynomial NCPolynomial::operator*(cplx s) const {
  NCPolynomial r(alpha_star_, beta_star_);
  for (const auto& [w, c] : terms_) r.add_term(w, c * s);
  return r;
}

NCPolynomial NCPolynomial::pow(int k) const {
  if (k < 0) throw DomainError("negative power");
  NCPolynomial r = constant(1.0, alpha_star_, beta_star_);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

NCPolynomial NCPolynomial::truncated(int D) const {
  NCPolynomial r(alpha_star_, beta_star_);
  for (const auto& [w, c] : terms_)
    if (static_cast<int>(w.size()) <= D) r.terms_.emplace(w, c);
  return r;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_coeff(cplx c) {
  if (c.imag() == 0.0) return format_double(c.real());
  std::string im = format_double(c.imag());
  if (im[0] != '-') im = "+" + im;
  return "(" + format_double(c.real()) + im + "i)";
}

}  // namespace

std::string format_poly(const NCPolynomial& p) {
  if (p.is_zero()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [w, c] : p.terms()) {
    if (!first) s += " + ";
    first = false;
    if (w.empty()) {
      s += format_coeff(c);
    } else if (c == cplx(1.0)) {
      s += format_word(w);
    } else {
      s += format_coeff(c) + "*" + format_word(w);
    }
  }
  return s;
}

NCPolynomial adjoint(const NCPolynomial& p) {
  NCPolynomial r(p.alpha_star(), p.beta_star());
  for (const auto& [w, c] : p.terms()) {
    Word v(w.rbegin(), w.rend());
    for (Symbol& s : v) s = s.involution();
    r.add_term(v, std::conj(c));
  }
  return r;
}

bool is_self_adjoint(const NCPolynomial& p) { return adjoint(p) == p; }

ShiftedPolynomial shift_to_q(const NCPolynomial& p) {
  if (!is_self_adjoint(p)) throw DomainError("polynomial is not self-adjoint");
  cplx c = p.constant_term();
  if (c.imag() != 0.0) throw DomainError("constant term is not real");
  ShiftedPolynomial out;
  out.offset = c.real();
  out.q = NCPolynomial::constant(c, p.alpha_star(), p.beta_star()) - p;
  return out;
}

NCPolynomial hermitize(const NCPolynomial& q) {
  const int a = q.alpha_star(), b = q.beta_star();
  const int g = a + 2 * b;
  const double r = 1.0 / std::sqrt(2.0);
  auto image = [&](const Symbol& s) {
    NCPolynomial img(g, 0);
    if (s.kind == SymbolKind::HermitianX) {
      img.add_term({Symbol::x(s.index)}, 1.0);
    } else {
      double sign = s.kind == SymbolKind::GeneralY ? 1.0 : -1.0;
      img.add_term({Symbol::x(a + s.index)}, r);
      img.add_term({Symbol::x(a + b + s.index)}, cplx(0.0, sign * r));
    }
    return img;
  };
  NCPolynomial out(g, 0);
  for (const auto& [w, c] : q.terms()) {
    NCPolynomial t = NCPolynomial::constant(c, g, 0);
    for (const Symbol& s : w) t = t * image(s);
    out = out + t;
  }
  return out;
}

SeriesCoefficients inverse_series(const NCPolynomial& q, int D) {
  if (q.constant_term() != cplx(0.0)) throw DomainError("inverse_series needs q(0) = 0");
  if (D < 0) throw DomainError("negative series order");
  SeriesCoefficients s;
  s.order = D;
  // Words of length n satisfy s_w = sum over monomials u that are prefixes of w of c_u s_{w minus u}.
  std::vector<WordMap> by_len(D + 1);
  by_len[0][{}] = 1.0;
  for (int n = 1; n <= D; ++n) {
    for (const auto& [u, c] : q.terms()) {
      int k = static_cast<int>(u.size());
      if (k > n) break;
      for (const auto& [v, cv] : by_len[n - k]) {
        Word w = u;
        w.insert(w.end(), v.begin(), v.end());
        auto [it, inserted] = by_len[n].try_emplace(w, c * cv);
        if (!inserted) it->second += c * cv;
      }
    }
    std::erase_if(by_len[n], [](const auto& kv) { return kv.second == cplx(0.0); });
  }
  for (auto& level : by_len) s.coefficients.merge(level);
  return s;
}

CMatrix evaluate(const NCPolynomial& p, const MatrixAssignment& a) {
  Eigen::Index n = -1;
  auto size_of = [&](const CMatrix& m) {
    if (m.rows() != m.cols()) throw DomainError("assignment matrices must be square");
    if (n < 0) n = m.rows();
    if (m.rows() != n) throw DomainError("assignment matrices differ in size");
  };
  auto lookup = [&](const Symbol& s) -> const CMatrix& {
    const auto& pool = s.kind == SymbolKind::HermitianX ? a.X : a.Y;
    if (s.index < 1 || s.index > static_cast<int>(pool.size()) || pool[s.index - 1].size() == 0)
      throw DomainError("no matrix assigned to " + format_word({s.kind == SymbolKind::AdjointY ? Symbol::y(s.index) : s}));
    return pool[s.index - 1];
  };
  for (const auto& [w, c] : p.terms())
    for (const Symbol& s : w) size_of(lookup(s));
  if (n < 0) {
    for (const auto& m : a.X) if (m.size()) size_of(m);
    for (const auto& m : a.Y) if (m.size()) size_of(m);
  }
  if (n < 0) throw DomainError("cannot infer matrix size from an empty assignment");

  CMatrix out = CMatrix::Zero(n, n);
  for (const auto& [w, c] : p.terms()) {
    if (w.empty()) {
      out.diagonal().array() += c;
      continue;
    }
    CMatrix acc = (w[0].kind == SymbolKind::AdjointY) ? CMatrix(lookup(w[0]).adjoint()) : lookup(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (w[i].kind == SymbolKind::AdjointY)
        acc = acc * lookup(w[i]).adjoint();
      else
        acc = acc * lookup(w[i]);
    }
    out += c * acc;
  }
  return out;
}

}  // namespace ncdel
