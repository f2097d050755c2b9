// SPDX-License-Identifier: MIT

#include "fmmkit/expr.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace fmm {

namespace {

std::int64_t checked_i64(__int128 v, const char* op) {
  if (v > INT64_MAX || v < INT64_MIN)
    throw NumericalError(std::string("rational overflow in ") + op);
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t n) : num(n), den(1) {}

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw NumericalError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

Rational operator+(const Rational& a, const Rational& b) {
  __int128 n = static_cast<__int128>(a.num) * b.den +
               static_cast<__int128>(b.num) * a.den;
  __int128 d = static_cast<__int128>(a.den) * b.den;
  // normalize in 128 bits before narrowing
  __int128 x = n < 0 ? -n : n, y = d;
  while (y != 0) {
    __int128 t = x % y;
    x = y;
    y = t;
  }
  if (x == 0) x = 1;
  return Rational(checked_i64(n / x, "+"), checked_i64(d / x, "+"));
}

Rational operator-(const Rational& a, const Rational& b) {
  return a + Rational(-b.num, b.den);
}

Rational operator*(const Rational& a, const Rational& b) {
  Rational x(a.num, b.den);  // cross-cancel before multiplying
  Rational y(b.num, a.den);
  __int128 n = static_cast<__int128>(x.num) * y.num;
  __int128 d = static_cast<__int128>(x.den) * y.den;
  return Rational(checked_i64(n, "*"), checked_i64(d, "*"));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num == 0) throw NumericalError("rational division by zero");
  return a * Rational(b.den, b.num);
}

Rational operator-(const Rational& a) { return Rational(-a.num, a.den); }

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("expression error at position " + std::to_string(pos) +
                    " in \"" + text + "\": " + what);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  ExprPtr make(ExprNode n) { return std::make_shared<ExprNode>(std::move(n)); }

  std::int64_t integer() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos == start) fail("expected an integer");
    errno = 0;
    std::int64_t v = std::strtoll(text.substr(start, pos - start).c_str(),
                                  nullptr, 10);
    if (errno != 0) fail("integer literal out of range");
    return v;
  }

  ExprPtr primary() {
    char c = peek();
    if (c == '(') {
      ++pos;
      ExprPtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ExprNode n{ExprNode::Kind::Num};
      n.value = integer();
      return make(std::move(n));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) ||
              text[pos] == '_'))
        ++pos;
      ExprNode n{ExprNode::Kind::Var};
      n.name = text.substr(start, pos - start);
      return make(std::move(n));
    }
    fail("expected a number, name, or '('");
  }

  ExprPtr factor() {
    ExprPtr base = primary();
    if (eat('^')) {
      std::int64_t e = integer();
      if (e > 64) fail("exponent too large");
      ExprNode n{ExprNode::Kind::Pow};
      n.a = base;
      n.exponent = static_cast<int>(e);
      return make(std::move(n));
    }
    return base;
  }

  ExprPtr term() {
    ExprPtr lhs = factor();
    while (true) {
      if (eat('*')) {
        ExprNode n{ExprNode::Kind::Mul};
        n.a = lhs;
        n.b = factor();
        lhs = make(std::move(n));
      } else if (eat('/')) {
        ExprNode n{ExprNode::Kind::Div};
        n.a = lhs;
        n.b = factor();
        lhs = make(std::move(n));
      } else {
        return lhs;
      }
    }
  }

  ExprPtr expr() {
    bool negated = false;
    if (peek() == '-') {
      ++pos;
      negated = true;
    }
    ExprPtr lhs = term();
    if (negated) {
      ExprNode n{ExprNode::Kind::Neg};
      n.a = lhs;
      lhs = make(std::move(n));
    }
    while (true) {
      if (eat('+')) {
        ExprNode n{ExprNode::Kind::Add};
        n.a = lhs;
        n.b = term();
        lhs = make(std::move(n));
      } else if (peek() == '-') {
        ++pos;
        ExprNode n{ExprNode::Kind::Sub};
        n.a = lhs;
        n.b = term();
        lhs = make(std::move(n));
      } else {
        return lhs;
      }
    }
  }
};

int precedence(ExprNode::Kind k) {
  switch (k) {
    case ExprNode::Kind::Add:
    case ExprNode::Kind::Sub:
    case ExprNode::Kind::Neg:
      return 1;
    case ExprNode::Kind::Mul:
    case ExprNode::Kind::Div:
      return 2;
    case ExprNode::Kind::Pow:
      return 3;
    default:
      return 4;
  }
}

void print_infix(const ExprPtr& e, std::string& out, int parent_prec,
                 bool rhs_of_nonassoc) {
  int prec = precedence(e->kind);
  bool parens = prec < parent_prec || (prec == parent_prec && rhs_of_nonassoc);
  if (parens) out += '(';
  switch (e->kind) {
    case ExprNode::Kind::Num:
      out += std::to_string(e->value);
      break;
    case ExprNode::Kind::Var:
      out += e->name;
      break;
    case ExprNode::Kind::Neg:
      out += '-';
      print_infix(e->a, out, prec, true);
      break;
    case ExprNode::Kind::Add:
      print_infix(e->a, out, prec, false);
      out += '+';
      // parenthesize equal-precedence rhs so x+(y+z) and x+(-y) round-trip
      print_infix(e->b, out, prec, true);
      break;
    case ExprNode::Kind::Sub:
      print_infix(e->a, out, prec, false);
      out += '-';
      print_infix(e->b, out, prec + 1, false);  // a-(b+c) needs parens
      break;
    case ExprNode::Kind::Mul:
      print_infix(e->a, out, prec, false);
      out += '*';
      print_infix(e->b, out, prec, true);  // x*(y/z) must keep its parens
      break;
    case ExprNode::Kind::Div:
      print_infix(e->a, out, prec, false);
      out += '/';
      print_infix(e->b, out, prec + 1, false);  // a/(b*c) needs parens
      break;
    case ExprNode::Kind::Pow:
      print_infix(e->a, out, prec + 1, false);  // (a^b)^c and (-a)^b need them
      out += '^';
      out += std::to_string(e->exponent);
      break;
  }
  if (parens) out += ')';
}

}  // namespace

ExprPtr parse_expr(const std::string& text) {
  Parser p(text);
  ExprPtr e = p.expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  return e;
}

std::string to_string(const ExprPtr& e) {
  std::string out;
  print_infix(e, out, 0, false);
  return out;
}

std::string to_sexpr(const ExprPtr& e) {
  switch (e->kind) {
    case ExprNode::Kind::Num:
      return std::to_string(e->value);
    case ExprNode::Kind::Var:
      return e->name;
    case ExprNode::Kind::Neg:
      return "(neg " + to_sexpr(e->a) + ")";
    case ExprNode::Kind::Add:
      return "(add " + to_sexpr(e->a) + " " + to_sexpr(e->b) + ")";
    case ExprNode::Kind::Sub:
      return "(sub " + to_sexpr(e->a) + " " + to_sexpr(e->b) + ")";
    case ExprNode::Kind::Mul:
      return "(mul " + to_sexpr(e->a) + " " + to_sexpr(e->b) + ")";
    case ExprNode::Kind::Div:
      return "(div " + to_sexpr(e->a) + " " + to_sexpr(e->b) + ")";
    case ExprNode::Kind::Pow:
      return "(pow " + to_sexpr(e->a) + " " + std::to_string(e->exponent) +
             ")";
  }
  return "?";
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprNode::Kind::Num:
      return a->value == b->value;
    case ExprNode::Kind::Var:
      return a->name == b->name;
    case ExprNode::Kind::Neg:
      return expr_equal(a->a, b->a);
    case ExprNode::Kind::Pow:
      return a->exponent == b->exponent && expr_equal(a->a, b->a);
    default:
      return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
  }
}

double eval(const ExprPtr& e, const std::map<std::string, double>& env) {
  switch (e->kind) {
    case ExprNode::Kind::Num:
      return static_cast<double>(e->value);
    case ExprNode::Kind::Var: {
      auto it = env.find(e->name);
      if (it == env.end()) throw DataError("unknown variable '" + e->name + "'");
      return it->second;
    }
    case ExprNode::Kind::Neg:
      return -eval(e->a, env);
    case ExprNode::Kind::Add:
      return eval(e->a, env) + eval(e->b, env);
    case ExprNode::Kind::Sub:
      return eval(e->a, env) - eval(e->b, env);
    case ExprNode::Kind::Mul:
      return eval(e->a, env) * eval(e->b, env);
    case ExprNode::Kind::Div: {
      double d = eval(e->b, env);
      if (d == 0.0) throw NumericalError("division by zero in expression");
      return eval(e->a, env) / d;
    }
    case ExprNode::Kind::Pow: {
      double base = eval(e->a, env);
      double out = 1.0;
      for (int i = 0; i < e->exponent; ++i) out *= base;
      return out;
    }
  }
  throw DataError("corrupt expression node");
}

Rational eval_rational(const ExprPtr& e,
                       const std::map<std::string, Rational>& env) {
  switch (e->kind) {
    case ExprNode::Kind::Num:
      return Rational(e->value);
    case ExprNode::Kind::Var: {
      auto it = env.find(e->name);
      if (it == env.end()) throw DataError("unknown variable '" + e->name + "'");
      return it->second;
    }
    case ExprNode::Kind::Neg:
      return -eval_rational(e->a, env);
    case ExprNode::Kind::Add:
      return eval_rational(e->a, env) + eval_rational(e->b, env);
    case ExprNode::Kind::Sub:
      return eval_rational(e->a, env) - eval_rational(e->b, env);
    case ExprNode::Kind::Mul:
      return eval_rational(e->a, env) * eval_rational(e->b, env);
    case ExprNode::Kind::Div:
      return eval_rational(e->a, env) / eval_rational(e->b, env);
    case ExprNode::Kind::Pow: {
      Rational base = eval_rational(e->a, env);
      Rational out(1);
      for (int i = 0; i < e->exponent; ++i) out = out * base;
      return out;
    }
  }
  throw DataError("corrupt expression node");
}

namespace {
void collect_vars(const ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprNode::Kind::Var) {
    for (const auto& s : out)
      if (s == e->name) return;
    out.push_back(e->name);
    return;
  }
  collect_vars(e->a, out);
  collect_vars(e->b, out);
}
}  // namespace

std::vector<std::string> free_vars(const ExprPtr& e) {
  std::vector<std::string> out;
  collect_vars(e, out);
  return out;
}

}  // namespace fmm
