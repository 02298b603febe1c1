#pragma once

/// Text front end for Expr. Grammar (see docs/grammar.md):
///
///   expr     = term { ("+" | "-") term }
///   term     = unary { ("*" | "/") unary }
///   unary    = ("+" | "-") unary | power
///   power    = primary [ "^" unary ]
///   primary  = number | ident | func "(" expr ")" | "(" expr ")"
///   func     = exp | sin | cos | tan | log | atan | sqrt
///
/// Identifiers: t, x, i, pi and caller-supplied bindings. Decimal literals are
/// converted to exact rationals. Exponents must reduce to rational constants.

#include "nlsgc/expr.hpp"

#include <cctype>
#include <complex>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nlsgc {

struct ParseError : std::invalid_argument {
  ParseError(const std::string& what, std::size_t off)
      : std::invalid_argument(what + " at byte " + std::to_string(off)), offset(off) {}
  std::size_t offset;
};

struct UnknownIdentifier : ParseError {
  UnknownIdentifier(const std::string& name, std::size_t off)
      : ParseError("unknown identifier '" + name + "'", off), identifier(name) {}
  std::string identifier;
};

/// Named values available to the parser (parameters such as nu, alpha, gh, or
/// whole sub-expressions such as W).
using Bindings = std::map<std::string, Expr>;

/// Raw syntax tree produced before lowering to canonical form. Kept so that the
/// unsimplified input can be evaluated independently of the normalizer.
struct SyntaxNode {
  enum class Kind { Number, Ident, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind{Kind::Number};
  Rational number;
  std::string name;  // identifier or function name
  std::vector<std::unique_ptr<SyntaxNode>> kids;
  std::size_t offset = 0;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  std::unique_ptr<SyntaxNode> parse_all() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return n;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool eat(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  static std::unique_ptr<SyntaxNode> node(SyntaxNode::Kind k, std::size_t off) {
    auto n = std::make_unique<SyntaxNode>();
    n->kind = k;
    n->offset = off;
    return n;
  }
  static std::unique_ptr<SyntaxNode> binary(SyntaxNode::Kind k, std::size_t off, std::unique_ptr<SyntaxNode> a,
                                            std::unique_ptr<SyntaxNode> b) {
    auto n = node(k, off);
    n->kids.push_back(std::move(a));
    n->kids.push_back(std::move(b));
    return n;
  }

  std::unique_ptr<SyntaxNode> expr() {
    auto lhs = term();
    for (;;) {
      skip();
      const std::size_t off = pos_;
      if (eat('+')) lhs = binary(SyntaxNode::Kind::Add, off, std::move(lhs), term());
      else if (eat('-')) lhs = binary(SyntaxNode::Kind::Sub, off, std::move(lhs), term());
      else return lhs;
    }
  }

  std::unique_ptr<SyntaxNode> term() {
    auto lhs = unary();
    for (;;) {
      skip();
      const std::size_t off = pos_;
      if (eat('*')) lhs = binary(SyntaxNode::Kind::Mul, off, std::move(lhs), unary());
      else if (eat('/')) lhs = binary(SyntaxNode::Kind::Div, off, std::move(lhs), unary());
      else return lhs;
    }
  }

  std::unique_ptr<SyntaxNode> unary() {
    skip();
    const std::size_t off = pos_;
    if (eat('-')) {
      auto n = node(SyntaxNode::Kind::Neg, off);
      n->kids.push_back(unary());
      return n;
    }
    if (eat('+')) return unary();
    return power();
  }

  std::unique_ptr<SyntaxNode> power() {
    auto base = primary();
    skip();
    const std::size_t off = pos_;
    if (eat('^')) return binary(SyntaxNode::Kind::Pow, off, std::move(base), unary());
    return base;
  }

  std::unique_ptr<SyntaxNode> primary() {
    skip();
    const std::size_t off = pos_;
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
      std::string name(s_.substr(pos_, end - pos_));
      pos_ = end;
      static const char* funcs[] = {"exp", "sin", "cos", "tan", "log", "atan", "sqrt"};
      for (const char* f : funcs) {
        if (name == f) {
          if (!eat('(')) throw ParseError("expected '(' after " + name, pos_);
          auto n = node(SyntaxNode::Kind::Call, off);
          n->name = name;
          n->kids.push_back(expr());
          if (!eat(')')) throw ParseError("expected ')'", pos_);
          return n;
        }
      }
      auto n = node(SyntaxNode::Kind::Ident, off);
      n->name = std::move(name);
      return n;
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  std::unique_ptr<SyntaxNode> number() {
    const std::size_t off = pos_;
    std::string digits;
    Integer scale = 1;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      digits += s_[pos_++];
      any = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        digits += s_[pos_++];
        scale *= 10;
        any = true;
      }
    }
    if (!any) throw ParseError("malformed number", off);
    long exp10 = 0;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      int sign = 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) {
        sign = s_[p] == '-' ? -1 : 1;
        ++p;
      }
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        std::string ed;
        while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ed += s_[p++];
        if (ed.size() > 4) throw ParseError("numeric exponent out of range", off);
        exp10 = sign * std::stol(ed);
        pos_ = p;
      }
    }
    Rational value(Integer(digits), scale);
    if (exp10 > 0) value *= Rational(boost::multiprecision::pow(Integer(10), static_cast<unsigned>(exp10)));
    if (exp10 < 0) value /= Rational(boost::multiprecision::pow(Integer(10), static_cast<unsigned>(-exp10)));
    auto n = node(SyntaxNode::Kind::Number, off);
    n->number = value;
    return n;
  }
};

inline Expr lower(const SyntaxNode& n, const Bindings& b) {
  using K = SyntaxNode::Kind;
  switch (n.kind) {
    case K::Number: return Expr(n.number);
    case K::Ident: {
      if (auto it = b.find(n.name); it != b.end()) return it->second;
      if (n.name == "t") return Expr::t();
      if (n.name == "x") return Expr::x();
      if (n.name == "i") return Expr::i();
      if (n.name == "pi") return Expr::pi();
      throw UnknownIdentifier(n.name, n.offset);
    }
    case K::Neg: return -lower(*n.kids[0], b);
    case K::Add: return lower(*n.kids[0], b) + lower(*n.kids[1], b);
    case K::Sub: return lower(*n.kids[0], b) - lower(*n.kids[1], b);
    case K::Mul: return lower(*n.kids[0], b) * lower(*n.kids[1], b);
    case K::Div: {
      Expr d = lower(*n.kids[1], b);
      if (d.is_zero()) throw ParseError("division by zero", n.offset);
      return lower(*n.kids[0], b) / d;
    }
    case K::Pow: {
      const Expr e = lower(*n.kids[1], b);
      auto c = e.constant_value();
      if (!c || !c->is_real()) throw ParseError("exponent must be a rational constant", n.kids[1]->offset);
      const Expr base = lower(*n.kids[0], b);
      if (base.is_zero() && c->re < 0) throw ParseError("zero raised to a negative power", n.offset);
      return base.pow(c->re);
    }
    case K::Call: {
      const Expr a = lower(*n.kids[0], b);
      if (n.name == "exp") return exp(a);
      if (n.name == "sin") return sin(a);
      if (n.name == "cos") return cos(a);
      if (n.name == "tan") return tan(a);
      if (n.name == "log") return log(a);
      if (n.name == "atan") return atan(a);
      if (n.name == "sqrt") return sqrt(a);
      break;
    }
  }
  throw ParseError("unsupported syntax node", n.offset);
}

}  // namespace detail

inline std::unique_ptr<SyntaxNode> parse_syntax(std::string_view text) { return detail::Parser(text).parse_all(); }

inline Expr parse(std::string_view text, const Bindings& bindings = {}) {
  auto tree = parse_syntax(text);
  return detail::lower(*tree, bindings);
}

/// Direct numeric evaluation of an unsimplified syntax tree. Independent of the
/// canonicalizer: bound names are evaluated through their own expressions.
inline std::complex<double> eval_syntax(const SyntaxNode& n, double t, double x, const Bindings& b = {}) {
  using K = SyntaxNode::Kind;
  switch (n.kind) {
    case K::Number: return to_double(n.number);
    case K::Ident:
      if (auto it = b.find(n.name); it != b.end()) return it->second.eval(t, x);
      if (n.name == "t") return t;
      if (n.name == "x") return x;
      if (n.name == "i") return {0.0, 1.0};
      if (n.name == "pi") return std::numbers::pi;
      throw UnknownIdentifier(n.name, n.offset);
    case K::Neg: return -eval_syntax(*n.kids[0], t, x, b);
    case K::Add: return eval_syntax(*n.kids[0], t, x, b) + eval_syntax(*n.kids[1], t, x, b);
    case K::Sub: return eval_syntax(*n.kids[0], t, x, b) - eval_syntax(*n.kids[1], t, x, b);
    case K::Mul: return eval_syntax(*n.kids[0], t, x, b) * eval_syntax(*n.kids[1], t, x, b);
    case K::Div: return eval_syntax(*n.kids[0], t, x, b) / eval_syntax(*n.kids[1], t, x, b);
    case K::Pow: {
      const auto base = eval_syntax(*n.kids[0], t, x, b);
      const auto e = eval_syntax(*n.kids[1], t, x, b);
      if (e.imag() == 0 && e.real() == std::round(e.real())) {
        const int k = static_cast<int>(e.real());
        std::complex<double> r = 1.0;
        for (int j = 0; j < std::abs(k); ++j) r *= base;
        return k < 0 ? 1.0 / r : r;
      }
      return std::pow(base, e);
    }
    case K::Call: {
      const auto a = eval_syntax(*n.kids[0], t, x, b);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "tan") return std::tan(a);
      if (n.name == "log") return std::log(a);
      if (n.name == "atan") return std::atan(a);
      if (n.name == "sqrt") return std::sqrt(a);
      break;
    }
  }
  throw ParseError("unsupported syntax node", n.offset);
}

/// Parses "p/q", "-p/q" or an integer into an exact rational; decimals are rejected.
inline Rational parse_exact_rational(std::string_view text) {
  std::string s(text);
  auto strip = [](std::string v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
    return v;
  };
  s = strip(s);
  auto valid_int = [](const std::string& v) {
    if (v.empty()) return false;
    std::size_t k = (v[0] == '-' || v[0] == '+') ? 1 : 0;
    if (k == v.size()) return false;
    for (; k < v.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(v[k]))) return false;
    return true;
  };
  const auto slash = s.find('/');
  const std::string num = strip(s.substr(0, slash));
  const std::string den = slash == std::string::npos ? "1" : strip(s.substr(slash + 1));
  if (!valid_int(num) || !valid_int(den)) throw ParseError("expected an exact rational 'p/q', got '" + s + "'", 0);
  Integer n(num[0] == '+' ? num.substr(1) : num), d(den[0] == '+' ? den.substr(1) : den);
  if (d == 0) throw ParseError("zero denominator in '" + s + "'", slash);
  return Rational(n, d);
}

}  // namespace nlsgc
