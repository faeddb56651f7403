#include <cctype>
#include <charconv>

#include "ncdel/ncpoly.hpp"

namespace ncdel {

namespace {

/// Recursive-descent parser over the polynomial grammar:
///   poly   := ["+"|"-"] term (("+"|"-") term)*
///   term   := factor ("*" factor)*
///   factor := base ["^" uint]
///   base   := number ["i"] | "i" | var ["'"] | "(" poly ")" ["'"]
class Parser {
 public:
  Parser(const std::string& text, int a, int b) : s_(text), a_(a), b_(b) {}

  NCPolynomial parse() {
    NCPolynomial p = poly();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  NCPolynomial poly() {
    NCPolynomial p(a_, b_);
    double sign = 1.0;
    if (accept('-')) sign = -1.0;
    else accept('+');
    p = p + term() * sign;
    while (true) {
      if (accept('+')) p = p + term();
      else if (accept('-')) p = p - term();
      else break;
    }
    return p;
  }

  NCPolynomial term() {
    NCPolynomial t = factor();
    while (accept('*')) t = t * factor();
    return t;
  }

  NCPolynomial factor() {
    NCPolynomial b = base();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      unsigned k = uint_literal();
      if (k > 64) {
        pos_ = start;
        fail("exponent too large");
      }
      b = b.pow(static_cast<int>(k));
    }
    return b;
  }

  unsigned uint_literal() {
    skip();
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc() || ptr == s_.data() + pos_) fail("expected an unsigned integer");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  NCPolynomial base() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NCPolynomial inner = poly();
      if (!accept(')')) fail("expected ')'");
      if (accept('\'')) inner = adjoint(inner);
      return inner;
    }
    if (c == 'x' || c == 'y') {
      std::size_t start = pos_;
      ++pos_;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
        fail("expected a variable index");
      unsigned idx = uint_literal();
      int bound = c == 'x' ? a_ : b_;
      if (idx < 1 || static_cast<int>(idx) > bound) {
        pos_ = start;
        fail("variable index out of range");
      }
      Symbol sym = c == 'x' ? Symbol::x(static_cast<int>(idx)) : Symbol::y(static_cast<int>(idx));
      if (accept('\'')) sym = sym.involution();
      return NCPolynomial::monomial({sym}, 1.0, a_, b_);
    }
    if (c == 'i') {
      ++pos_;
      return NCPolynomial::constant(cplx(0.0, 1.0), a_, b_);
    }
    if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      double sign = 1.0;
      if (c == '-' || c == '+') {
        sign = c == '-' ? -1.0 : 1.0;
        ++pos_;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc() || ptr == s_.data() + pos_) fail("malformed number");
      pos_ = static_cast<std::size_t>(ptr - s_.data());
      v *= sign;
      if (pos_ < s_.size() && s_[pos_] == 'i') {
        ++pos_;
        return NCPolynomial::constant(cplx(0.0, v), a_, b_);
      }
      return NCPolynomial::constant(v, a_, b_);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  int a_, b_;
  std::size_t pos_ = 0;
};

}  // namespace

NCPolynomial parse_poly(const std::string& text, int alpha_star, int beta_star) {
  if (alpha_star < 0 || beta_star < 0) throw DomainError("negative alphabet size");
  return Parser(text, alpha_star, beta_star).parse();
}

}  // namespace ncdel
