#pragma once

#include <cctype>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "conegeo/fields.hpp"
#include "conegeo/jet.hpp"

namespace conegeo {

// Tiny arithmetic-expression compiler for scalar chart functions. Grammar:
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | primary ('^' factor)?
//   primary:= number | name | name '(' expr ')' | '(' expr ')'
// Names: variables x, y (chart coordinates; t and th/theta are aliases),
// constant pi, and the usual one-argument functions. Expressions compile to
// closures over second-order jets, so parsed potentials carry exact
// derivatives through the rest of the library.
namespace expr_detail {

using Fn = std::function<Jet2(const Jet2&, const Jet2&)>;

inline const std::map<std::string, Jet2 (*)(const Jet2&)>& function_table() {
  static const std::map<std::string, Jet2 (*)(const Jet2&)> table = {
      {"sin", +[](const Jet2& a) { return sin(a); }},
      {"cos", +[](const Jet2& a) { return cos(a); }},
      {"tan", +[](const Jet2& a) { return sin(a) / cos(a); }},
      {"exp", +[](const Jet2& a) { return exp(a); }},
      {"log", +[](const Jet2& a) { return log(a); }},
      {"sqrt", +[](const Jet2& a) { return sqrt(a); }},
      {"atan", +[](const Jet2& a) { return atan(a); }},
      {"abs", +[](const Jet2& a) { return abs(a); }},
      {"sinh", +[](const Jet2& a) { return 0.5 * (exp(a) - exp(-1.0 * a)); }},
      {"cosh", +[](const Jet2& a) { return 0.5 * (exp(a) + exp(-1.0 * a)); }},
      {"tanh",
       +[](const Jet2& a) {
         Jet2 e = exp(-2.0 * a);
         return (1.0 - e) / (1.0 + e);
       }},
  };
  return table;
}

struct Parser {
  const std::string& text;
  size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  void skip() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip();
    return pos < text.size() ? text[pos] : '\0';
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("expression: " + what + " at position " + std::to_string(pos) +
                                " in \"" + text + "\"");
  }

  Fn parse_expr() {
    Fn lhs = parse_term();
    while (true) {
      if (eat('+')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](const Jet2& x, const Jet2& y) { return lhs(x, y) + rhs(x, y); };
      } else if (eat('-')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](const Jet2& x, const Jet2& y) { return lhs(x, y) - rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Fn parse_term() {
    Fn lhs = parse_factor();
    while (true) {
      if (eat('*')) {
        Fn rhs = parse_factor();
        lhs = [lhs, rhs](const Jet2& x, const Jet2& y) { return lhs(x, y) * rhs(x, y); };
      } else if (eat('/')) {
        Fn rhs = parse_factor();
        lhs = [lhs, rhs](const Jet2& x, const Jet2& y) { return lhs(x, y) / rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  // '-' binds looser than '^', so -x^2 means -(x^2); 2^3^2 is right-associative.
  Fn parse_factor() {
    if (eat('-')) {
      Fn inner = parse_factor();
      return [inner](const Jet2& x, const Jet2& y) { return -1.0 * inner(x, y); };
    }
    Fn base = parse_primary();
    if (eat('^')) {
      // constant integer exponents use repeated multiplication so that
      // negative bases stay meaningful; anything else goes through exp/log
      skip();
      size_t save = pos;
      bool neg = eat('-');
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        size_t end = 0;
        double v = std::stod(text.substr(pos), &end);
        pos += end;
        if (neg) v = -v;
        if (pos < text.size() && peek() == '^') {
          pos = save;  // chained powers: hand the whole tail to the general path
        } else if (v == std::floor(v) && std::abs(v) <= 64.0) {
          long n = static_cast<long>(v);
          return [base, n](const Jet2& x, const Jet2& y) {
            Jet2 b = base(x, y);
            Jet2 acc(1.0);
            for (long k = 0; k < std::labs(n); ++k) acc = acc * b;
            return n >= 0 ? acc : Jet2(1.0) / acc;
          };
        } else {
          return [base, v](const Jet2& x, const Jet2& y) {
            return exp(v * log(base(x, y)));
          };
        }
      } else {
        pos = save;
      }
      Fn ex = parse_factor();  // right-associative
      return [base, ex](const Jet2& x, const Jet2& y) {
        return exp(ex(x, y) * log(base(x, y)));
      };
    }
    return base;
  }

  Fn parse_primary() {
    char c = peek();
    if (c == '(') {
      eat('(');
      Fn inner = parse_expr();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end = 0;
      double v;
      try {
        v = std::stod(text.substr(pos), &end);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos += end;
      return [v](const Jet2&, const Jet2&) { return Jet2(v); };
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      std::string name = text.substr(start, pos - start);
      if (peek() == '(') {
        auto it = function_table().find(name);
        if (it == function_table().end()) fail("unknown function '" + name + "'");
        eat('(');
        Fn arg = parse_expr();
        if (!eat(')')) fail("missing ')'");
        auto f = it->second;
        return [f, arg](const Jet2& x, const Jet2& y) { return f(arg(x, y)); };
      }
      if (name == "x" || name == "t") return [](const Jet2& x, const Jet2&) { return x; };
      if (name == "y" || name == "th" || name == "theta")
        return [](const Jet2&, const Jet2& y) { return y; };
      if (name == "pi") return [](const Jet2&, const Jet2&) { return Jet2(M_PI); };
      if (name == "e") return [](const Jet2&, const Jet2&) { return Jet2(M_E); };
      fail("unknown name '" + name + "'");
    }
    fail("unexpected character");
  }
};

}  // namespace expr_detail

/// Compile an expression in the chart variables into a scalar field with
/// exact second-order jets. Throws std::invalid_argument on parse errors.
inline ScalarField parse_scalar_field(const std::string& text) {
  expr_detail::Parser parser(text);
  expr_detail::Fn fn = parser.parse_expr();
  parser.skip();
  if (parser.pos != text.size()) parser.fail("trailing input");
  return ScalarField::analytic([fn](const Jet2& x, const Jet2& y) { return fn(x, y); });
}

}  // namespace conegeo
