// SPDX-License-Identifier: MIT
//
// expr.hpp — small arithmetic expressions for parametric decomposition
// families.
//
// Grammar (recursive descent, no implicit multiplication, integers only):
//   expr    := ['-'] term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := primary ['^' integer]
//   primary := integer | identifier | '(' expr ')'
// Identifiers may have several characters ("a1", "ab"), so products must be
// written explicitly: "a*b", not "ab".  Unary minus binds at the additive
// level: -v*w/a^2 parses as (neg (div (mul v w) (pow a 2))).
//
// Evaluation is provided over doubles and over exact rationals (int64
// numerator/denominator, 128-bit intermediates; overflow throws instead of
// wrapping).

#pragma once

#include "fmmkit/types.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace fmm {

// Exact rational arithmetic on int64 with overflow detection.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;  // always > 0, gcd(|num|, den) = 1

  Rational() = default;
  Rational(std::int64_t n);  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return den == 1; }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a);
  friend bool operator==(const Rational& a, const Rational& b) = default;

  std::string str() const;  // "3", "-1/2"
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow };
  Kind kind;
  std::int64_t value = 0;  // Num
  std::string name;        // Var
  ExprPtr a, b;            // operands (Pow uses a and exponent)
  int exponent = 0;        // Pow
};

// Throws DataError with a character position on malformed input.
ExprPtr parse_expr(const std::string& text);

// Canonical infix form; parse(to_string(e)) reproduces e structurally.
std::string to_string(const ExprPtr& e);
// Lisp-style form for tests: (neg (div (mul v w) (pow a 2))).
std::string to_sexpr(const ExprPtr& e);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Unknown variables throw DataError; division by zero NumericalError.
double eval(const ExprPtr& e, const std::map<std::string, double>& env);
Rational eval_rational(const ExprPtr& e,
                       const std::map<std::string, Rational>& env);

// Free variables in first-appearance order.
std::vector<std::string> free_vars(const ExprPtr& e);

}  // namespace fmm
