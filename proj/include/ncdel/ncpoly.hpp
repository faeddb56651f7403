#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ncdel/core.hpp"

namespace ncdel {

enum class SymbolKind : std::uint8_t { HermitianX = 0, GeneralY = 1, AdjointY = 2 };

struct Symbol {
  SymbolKind kind = SymbolKind::HermitianX;
  int index = 1;  ///< 1-based alpha or beta

  static Symbol x(int a) { return {SymbolKind::HermitianX, a}; }
  static Symbol y(int b) { return {SymbolKind::GeneralY, b}; }
  static Symbol ystar(int b) { return {SymbolKind::AdjointY, b}; }

  Symbol involution() const;
  auto operator<=>(const Symbol&) const = default;
};

using Word = std::vector<Symbol>;

/// Degree first, then lexicographic on (kind, index).
struct WordLess {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

using WordMap = std::map<Word, cplx, WordLess>;

/// Word over hermitian labels 1..gamma, the form used after hermitization.
Word x_word(const std::vector<int>& labels);
std::string format_word(const Word& w);

class ParseError : public DomainError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DomainError(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class NCPolynomial {
 public:
  NCPolynomial() = default;
  NCPolynomial(int alpha_star, int beta_star) : alpha_star_(alpha_star), beta_star_(beta_star) {}

  static NCPolynomial constant(cplx c, int alpha_star, int beta_star);
  static NCPolynomial monomial(const Word& w, cplx c, int alpha_star, int beta_star);

  int alpha_star() const { return alpha_star_; }
  int beta_star() const { return beta_star_; }
  const WordMap& terms() const { return terms_; }

  /// Adds c to the coefficient of w, erasing the entry when it cancels exactly.
  void add_term(const Word& w, cplx c);
  cplx coefficient(const Word& w) const;
  cplx constant_term() const { return coefficient({}); }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  bool has_general_symbols() const;
  bool operator==(const NCPolynomial& o) const;

  NCPolynomial operator+(const NCPolynomial& o) const;
  NCPolynomial operator-(const NCPolynomial& o) const;
  NCPolynomial operator*(const NCPolynomial& o) const;
  NCPolynomial operator*(cplx s) const;
  NCPolynomial pow(int k) const;
  /// Drops all words longer than D.
  NCPolynomial truncated(int D) const;

 private:
  void check_alphabet(const NCPolynomial& o) const;

  int alpha_star_ = 0;
  int beta_star_ = 0;
  WordMap terms_;
};

struct SeriesCoefficients {
  int order = 0;
  WordMap coefficients;  ///< only nonzero words stored; absent words are exact zeros

  cplx at(const Word& w) const {
    auto it = coefficients.find(w);
    return it == coefficients.end() ? cplx(0.0) : it->second;
  }
};

struct MatrixAssignment {
  std::vector<CMatrix> X;  ///< X[a-1] for x_a, hermitian
  std::vector<CMatrix> Y;  ///< Y[b-1] for y_b; adjoints are formed internally
};

NCPolynomial parse_poly(const std::string& text, int alpha_star, int beta_star);
std::string format_poly(const NCPolynomial& p);

NCPolynomial adjoint(const NCPolynomial& p);
bool is_self_adjoint(const NCPolynomial& p);

struct ShiftedPolynomial {
  double offset = 0.0;
  NCPolynomial q;
};
/// Writes a self-adjoint p as c + 1 - (1 - q) with q(0) = 0, i.e. q = c - p.
ShiftedPolynomial shift_to_q(const NCPolynomial& p);

/// Substitutes y_b = (x_{a*+b} + i x_{a*+b*+b})/sqrt2; result has alpha* + 2 beta* hermitian symbols.
NCPolynomial hermitize(const NCPolynomial& q);

/// Coefficients of sum_k q^k on all words of length <= D.
SeriesCoefficients inverse_series(const NCPolynomial& q, int D);

CMatrix evaluate(const NCPolynomial& p, const MatrixAssignment& a);

}  // namespace ncdel
