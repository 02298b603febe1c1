#pragma once

/// Immutable symbolic expressions in the coordinates t and x.
///
/// Every Expr is kept in a canonical sum-of-products form at construction:
/// a sorted list of terms, each an exact complex-rational coefficient times a
/// sorted list of factors atom^exponent. Polynomial parts are expanded, equal
/// monomials are merged, exponentials are merged into a single exp factor per
/// term and sums raised to non-positive or fractional powers become opaque
/// atoms with their content (leading coefficient) pulled out. Structural
/// equality of two canonical forms therefore implies semantic equality; the
/// converse does not hold (e.g. sin^2+cos^2 is not reduced to 1), which is
/// what numeric zero-testing is for.
///
/// Powers of atoms are formal: (t^2)^(1/2) becomes t. Callers that take
/// square roots must stay on a branch where this is valid.

#include "nlsgc/rational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlsgc {

enum class Var { t, x };

/// Raised by numeric evaluation at (or numerically at) a pole, log(0) or tan pole.
struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Raised by x_laurent_decompose when x enters non-polynomially.
struct NotLaurentInX : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// View of the top-level shape of a canonical expression.
enum class NodeKind { Const, Var, Sum, Prod, Pow, Exp, Log, Sin, Cos, Tan, Atan, Pi, Radical };

class Expr;

namespace detail {

enum class AtomKind : std::uint8_t { Pi, T, X, Radical, Exp, Log, Sin, Cos, Tan, Atan, Power };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Atom {
  AtomKind kind{AtomKind::T};
  NodePtr arg;        // Exp/Log/Sin/Cos/Tan/Atan argument, Power base
  Rational radicand;  // Radical only
};

struct Factor {
  Atom atom;
  Rational exponent;
};

struct Term {
  CRational coeff;
  std::complex<double> coeff_d;
  std::vector<Factor> factors;  // sorted by atom, unique atoms
};

constexpr unsigned kDepT = 1u;
constexpr unsigned kDepX = 2u;

struct Node {
  std::vector<Term> terms;  // sorted by monomial, nonzero coefficients
  unsigned deps = 0;
};

inline unsigned dep_bit(Var v) { return v == Var::t ? kDepT : kDepX; }

inline unsigned atom_deps(const Atom& a) {
  switch (a.kind) {
    case AtomKind::T: return kDepT;
    case AtomKind::X: return kDepX;
    case AtomKind::Pi:
    case AtomKind::Radical: return 0;
    default: return a.arg ? a.arg->deps : 0;
  }
}

int compare_node(const Node& a, const Node& b);

inline int compare_atom(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.kind == AtomKind::Radical) {
    if (a.radicand != b.radicand) return a.radicand < b.radicand ? -1 : 1;
    return 0;
  }
  if (a.arg && b.arg) {
    if (a.arg == b.arg) return 0;
    return compare_node(*a.arg, *b.arg);
  }
  return 0;
}

inline int compare_factors(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_atom(a[i].atom, b[i].atom)) return c;
    if (a[i].exponent != b[i].exponent) return a[i].exponent < b[i].exponent ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

inline int compare_node(const Node& a, const Node& b) {
  if (&a == &b) return 0;
  const std::size_t n = std::min(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_factors(a.terms[i].factors, b.terms[i].factors)) return c;
    if (int c = compare(a.terms[i].coeff, b.terms[i].coeff)) return c;
  }
  if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size() ? -1 : 1;
  return 0;
}

inline Term make_term(CRational c, std::vector<Factor> f) {
  Term t;
  t.coeff_d = c.to_complex();
  t.coeff = std::move(c);
  t.factors = std::move(f);
  return t;
}

inline NodePtr finish(std::vector<Term> terms) {
  auto n = std::make_shared<Node>();
  for (const auto& term : terms)
    for (const auto& f : term.factors) n->deps |= atom_deps(f.atom);
  n->terms = std::move(terms);
  return n;
}

inline const NodePtr& zero_node() {
  static const NodePtr z = finish({});
  return z;
}

inline NodePtr const_node(const CRational& c) {
  if (c.is_zero()) return zero_node();
  return finish({make_term(c, {})});
}

inline const NodePtr& one_node() {
  static const NodePtr o = const_node(CRational(1));
  return o;
}

/// Single-term node from an already sorted factor list (no rewriting).
inline NodePtr raw_monomial(const CRational& c, std::vector<Factor> factors) {
  if (c.is_zero()) return zero_node();
  return finish({make_term(c, std::move(factors))});
}

inline NodePtr atom_node(Atom a, Rational e = 1) {
  std::vector<Factor> f;
  f.push_back(Factor{std::move(a), std::move(e)});
  return raw_monomial(CRational(1), std::move(f));
}

inline std::optional<CRational> as_constant(const Node& n) {
  if (n.terms.empty()) return CRational(0);
  if (n.terms.size() == 1 && n.terms[0].factors.empty()) return n.terms[0].coeff;
  return std::nullopt;
}

NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr pow(const NodePtr& a, const Rational& e);
NodePtr scale(const NodePtr& a, const CRational& c);
NodePtr make_exp(const NodePtr& arg);
NodePtr normalize_term(const CRational& coeff, const std::vector<Factor>& factors);

inline NodePtr add(const NodePtr& a, const NodePtr& b) {
  if (a->terms.empty()) return b;
  if (b->terms.empty()) return a;
  std::vector<Term> out;
  out.reserve(a->terms.size() + b->terms.size());
  std::size_t i = 0, j = 0;
  while (i < a->terms.size() || j < b->terms.size()) {
    if (j == b->terms.size()) { out.push_back(a->terms[i++]); continue; }
    if (i == a->terms.size()) { out.push_back(b->terms[j++]); continue; }
    const int c = compare_factors(a->terms[i].factors, b->terms[j].factors);
    if (c < 0) out.push_back(a->terms[i++]);
    else if (c > 0) out.push_back(b->terms[j++]);
    else {
      CRational s = a->terms[i].coeff + b->terms[j].coeff;
      if (!s.is_zero()) out.push_back(make_term(std::move(s), a->terms[i].factors));
      ++i; ++j;
    }
  }
  return finish(std::move(out));
}

inline NodePtr sum_nodes(std::vector<NodePtr> parts) {
  // pairwise reduction keeps merges balanced
  if (parts.empty()) return zero_node();
  while (parts.size() > 1) {
    std::vector<NodePtr> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t k = 0; k + 1 < parts.size(); k += 2) next.push_back(add(parts[k], parts[k + 1]));
    if (parts.size() % 2) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.front();
}

inline NodePtr scale(const NodePtr& a, const CRational& c) {
  if (c.is_zero()) return zero_node();
  if (c.is_one()) return a;
  std::vector<Term> out;
  out.reserve(a->terms.size());
  for (const auto& t : a->terms) out.push_back(make_term(t.coeff * c, t.factors));
  return finish(std::move(out));
}

inline std::vector<Factor> merge_factors(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  std::vector<Factor> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size()) { out.push_back(a[i++]); continue; }
    if (i == a.size()) { out.push_back(b[j++]); continue; }
    const int c = compare_atom(a[i].atom, b[j].atom);
    if (c < 0) out.push_back(a[i++]);
    else if (c > 0) out.push_back(b[j++]);
    else {
      Rational e = a[i].exponent + b[j].exponent;
      if (e != 0) out.push_back(Factor{a[i].atom, std::move(e)});
      ++i; ++j;
    }
  }
  return out;
}

/// Content/primitive split of a multi-term sum: a = c * P with P's first coefficient 1.
inline std::pair<CRational, NodePtr> primitive(const NodePtr& a) {
  const CRational c = a->terms.front().coeff;
  return {c, scale(a, CRational(1) / c)};
}

/// c^e for a constant c, as a node (may contain a Radical or Power atom).
inline NodePtr const_pow(const CRational& c, const Rational& e) {
  if (is_integer(e)) return const_node(pow_int(c, static_cast<long>(boost::multiprecision::numerator(e))));
  if (c.is_real() && c.re > 0 && is_integer(e * 2)) {
    Atom r{AtomKind::Radical, nullptr, c.re};
    return normalize_term(CRational(1), {Factor{r, e}});
  }
  if (c.is_zero()) {
    if (e > 0) return zero_node();
    throw SingularityError("0 raised to a negative power");
  }
  return atom_node(Atom{AtomKind::Power, const_node(c), {}}, e);
}

inline NodePtr expand_pow(const NodePtr& base, long n) {
  NodePtr result = one_node();
  NodePtr b = base;
  while (n) {
    if (n & 1) result = mul(result, b);
    n >>= 1;
    if (n) b = mul(b, b);
  }
  return result;
}

inline NodePtr normalize_term(const CRational& coeff, const std::vector<Factor>& factors) {
  if (coeff.is_zero()) return zero_node();
  CRational c = coeff;
  std::vector<Factor> keep;
  keep.reserve(factors.size());
  std::vector<const Factor*> exps;
  std::vector<NodePtr> extra;
  Rational radical_product = 1;
  bool has_radical = false;
  for (const auto& f : factors) {
    if (f.exponent == 0) continue;
    switch (f.atom.kind) {
      case AtomKind::Exp:
        exps.push_back(&f);
        break;
      case AtomKind::Radical: {
        const Rational k2 = f.exponent * 2;
        if (!is_integer(k2)) {
          keep.push_back(Factor{Atom{AtomKind::Power, const_node(CRational(f.atom.radicand)), {}}, f.exponent});
          break;
        }
        const long k = static_cast<long>(boost::multiprecision::numerator(k2));
        long whole = k >= 0 ? k / 2 : -((-k + 1) / 2);
        const long odd = k - 2 * whole;
        c = c * CRational(pow_int(f.atom.radicand, whole));
        if (odd) {
          radical_product *= f.atom.radicand;
          has_radical = true;
        }
        break;
      }
      case AtomKind::Power: {
        if (f.exponent > 0 && is_integer(f.exponent)) {
          extra.push_back(expand_pow(f.atom.arg, static_cast<long>(boost::multiprecision::numerator(f.exponent))));
        } else {
          keep.push_back(f);
        }
        break;
      }
      default:
        keep.push_back(f);
    }
  }
  if (has_radical && radical_product != 1) {
    auto [s, r] = extract_square(radical_product);
    c = c * CRational(s);
    if (r != 1) keep.push_back(Factor{Atom{AtomKind::Radical, nullptr, r}, Rational(1, 2)});
  }
  std::sort(keep.begin(), keep.end(), [](const Factor& a, const Factor& b) { return compare_atom(a.atom, b.atom) < 0; });
  NodePtr node;
  if (exps.size() == 1 && exps.front()->exponent == 1) {
    keep.push_back(*exps.front());
    std::sort(keep.begin(), keep.end(), [](const Factor& a, const Factor& b) { return compare_atom(a.atom, b.atom) < 0; });
    node = raw_monomial(c, std::move(keep));
  } else {
    node = raw_monomial(c, std::move(keep));
    if (!exps.empty()) {
      std::vector<NodePtr> args;
      for (const Factor* f : exps) args.push_back(scale(f->atom.arg, CRational(f->exponent)));
      node = mul(node, make_exp(sum_nodes(std::move(args))));
    }
  }
  for (const auto& e : extra) node = mul(node, e);
  return node;
}

inline NodePtr mul_terms(const Term& a, const Term& b) {
  const CRational c = a.coeff * b.coeff;
  if (a.factors.empty()) return raw_monomial(c, b.factors);
  if (b.factors.empty()) return raw_monomial(c, a.factors);
  auto merged = merge_factors(a.factors, b.factors);
  bool needs_work = false;
  int exp_count = 0;
  for (const auto& f : merged) {
    if (f.atom.kind == AtomKind::Exp) {
      ++exp_count;
      if (f.exponent != 1) needs_work = true;
    } else if (f.atom.kind == AtomKind::Radical) {
      needs_work = true;
    } else if (f.atom.kind == AtomKind::Power && f.exponent > 0 && is_integer(f.exponent)) {
      needs_work = true;
    }
  }
  if (exp_count > 1) needs_work = true;
  if (!needs_work) return raw_monomial(c, std::move(merged));
  return normalize_term(c, merged);
}

/// If every term of b carries base^k (k<0) and a == content * base, cancel one power.
inline std::optional<NodePtr> try_cancel(const NodePtr& a, const NodePtr& b) {
  if (a->terms.size() < 2 || b->terms.empty()) return std::nullopt;
  auto [c, prim] = primitive(a);
  for (const auto& t : b->terms) {
    bool found = false;
    for (const auto& f : t.factors)
      if (f.atom.kind == AtomKind::Power && f.exponent < 0 && compare_node(*f.atom.arg, *prim) == 0) found = true;
    if (!found) return std::nullopt;
  }
  std::vector<NodePtr> parts;
  for (const auto& t : b->terms) {
    std::vector<Factor> fs = t.factors;
    for (auto& f : fs)
      if (f.atom.kind == AtomKind::Power && compare_node(*f.atom.arg, *prim) == 0) f.exponent += 1;
    fs.erase(std::remove_if(fs.begin(), fs.end(), [](const Factor& f) { return f.exponent == 0; }), fs.end());
    parts.push_back(normalize_term(t.coeff * c, fs));
  }
  return sum_nodes(std::move(parts));
}

inline NodePtr mul(const NodePtr& a, const NodePtr& b) {
  if (a->terms.empty() || b->terms.empty()) return zero_node();
  if (auto ca = as_constant(*a)) return scale(b, *ca);
  if (auto cb = as_constant(*b)) return scale(a, *cb);
  if (auto r = try_cancel(a, b)) return *r;
  if (auto r = try_cancel(b, a)) return *r;
  std::vector<NodePtr> parts;
  parts.reserve(a->terms.size() * b->terms.size());
  for (const auto& ta : a->terms)
    for (const auto& tb : b->terms) parts.push_back(mul_terms(ta, tb));
  return sum_nodes(std::move(parts));
}

/// Writes a = N / D where D collects the atoms (t, x, or sums) that appear with
/// negative integer exponents; returns N and D's factors, or nullopt if D = 1.
inline std::optional<std::pair<NodePtr, std::vector<Factor>>> split_denominator(const NodePtr& a) {
  std::vector<Factor> den;
  for (const auto& term : a->terms) {
    for (const auto& f : term.factors) {
      if (!(f.exponent < 0) || !is_integer(f.exponent)) continue;
      if (!(f.atom.kind == AtomKind::Power || f.atom.kind == AtomKind::T || f.atom.kind == AtomKind::X)) continue;
      auto it = std::find_if(den.begin(), den.end(), [&](const Factor& d) { return compare_atom(d.atom, f.atom) == 0; });
      if (it == den.end()) den.push_back(Factor{f.atom, -f.exponent});
      else if (-f.exponent > it->exponent) it->exponent = -f.exponent;
    }
  }
  if (den.empty()) return std::nullopt;
  std::sort(den.begin(), den.end(), [](const Factor& x, const Factor& y) { return compare_atom(x.atom, y.atom) < 0; });
  std::vector<NodePtr> parts;
  parts.reserve(a->terms.size());
  for (const auto& term : a->terms) parts.push_back(normalize_term(term.coeff, merge_factors(term.factors, den)));
  return std::make_pair(sum_nodes(std::move(parts)), std::move(den));
}

inline NodePtr pow(const NodePtr& a, const Rational& e) {
  if (e == 0) return one_node();
  if (e == 1) return a;
  if (a->terms.empty()) {
    if (e > 0) return zero_node();
    throw SingularityError("0 raised to a negative power");
  }
  if (auto c = as_constant(*a)) return const_pow(*c, e);
  const bool integral = is_integer(e);
  if (integral && e > 0) return expand_pow(a, static_cast<long>(boost::multiprecision::numerator(e)));
  if (integral && a->terms.size() > 1) {
    // (N/D)^e = N^e D^{-e}: puts nested fractions over a common denominator
    if (auto nd = split_denominator(a)) {
      std::vector<Factor> d = nd->second;
      for (auto& f : d) f.exponent *= -e;
      return mul(pow(nd->first, e), normalize_term(CRational(1), d));
    }
  }
  if (a->terms.size() == 1) {
    const Term& t = a->terms.front();
    const bool positive_coeff = t.coeff.is_real() && t.coeff.re > 0;
    if (integral || positive_coeff) {
      NodePtr cpart = const_pow(t.coeff, e);
      std::vector<Factor> fs = t.factors;
      for (auto& f : fs) f.exponent *= e;
      return mul(cpart, normalize_term(CRational(1), fs));
    }
    return atom_node(Atom{AtomKind::Power, a, {}}, e);
  }
  auto [c, prim] = primitive(a);
  const bool positive_content = c.is_real() && c.re > 0;
  if (integral || positive_content) {
    return mul(const_pow(c, e), atom_node(Atom{AtomKind::Power, prim, {}}, e));
  }
  return atom_node(Atom{AtomKind::Power, a, {}}, e);
}

inline bool single_atom(const Node& n, AtomKind k, const Atom** out = nullptr) {
  if (n.terms.size() != 1) return false;
  const Term& t = n.terms.front();
  if (!t.coeff.is_one() || t.factors.size() != 1 || t.factors[0].exponent != 1) return false;
  if (t.factors[0].atom.kind != k) return false;
  if (out) *out = &t.factors[0].atom;
  return true;
}

inline NodePtr make_exp(const NodePtr& arg) {
  if (arg->terms.empty()) return one_node();
  std::vector<Term> rest;
  NodePtr pulled = one_node();
  for (const auto& t : arg->terms) {
    if (t.coeff.is_real() && t.factors.size() == 1 && t.factors[0].exponent == 1 &&
        t.factors[0].atom.kind == AtomKind::Log) {
      pulled = mul(pulled, pow(t.factors[0].atom.arg, t.coeff.re));
    } else {
      rest.push_back(t);
    }
  }
  if (rest.empty()) return pulled;
  NodePtr e = atom_node(Atom{AtomKind::Exp, finish(std::move(rest)), {}});
  return mul(pulled, e);
}

inline NodePtr make_log(const NodePtr& u) {
  if (auto c = as_constant(*u); c && c->is_one()) return zero_node();
  const Atom* a = nullptr;
  if (single_atom(*u, AtomKind::Exp, &a)) return a->arg;
  return atom_node(Atom{AtomKind::Log, u, {}});
}

inline bool leading_negative(const Node& n) { return !n.terms.empty() && n.terms.front().coeff.is_negative(); }

inline NodePtr negate(const NodePtr& a) { return scale(a, CRational(-1)); }

// cos(atan u) = (1 + u^2)^(-1/2), sin(atan u) = u (1 + u^2)^(-1/2)
inline NodePtr cos_of_atan(const NodePtr& u) { return pow(add(one_node(), mul(u, u)), Rational(-1, 2)); }

inline NodePtr make_sin(const NodePtr& a) {
  if (a->terms.empty()) return zero_node();
  if (leading_negative(*a)) return negate(make_sin(negate(a)));
  const Atom* inner = nullptr;
  if (single_atom(*a, AtomKind::Atan, &inner)) return mul(inner->arg, cos_of_atan(inner->arg));
  return atom_node(Atom{AtomKind::Sin, a, {}});
}

inline NodePtr make_cos(const NodePtr& a) {
  if (a->terms.empty()) return one_node();
  if (leading_negative(*a)) return make_cos(negate(a));
  const Atom* inner = nullptr;
  if (single_atom(*a, AtomKind::Atan, &inner)) return cos_of_atan(inner->arg);
  return atom_node(Atom{AtomKind::Cos, a, {}});
}

inline NodePtr make_tan(const NodePtr& a) {
  if (a->terms.empty()) return zero_node();
  if (leading_negative(*a)) return negate(atom_node(Atom{AtomKind::Tan, negate(a), {}}));
  const Atom* inner = nullptr;
  if (single_atom(*a, AtomKind::Atan, &inner)) return inner->arg;
  return atom_node(Atom{AtomKind::Tan, a, {}});
}

inline NodePtr make_atan(const NodePtr& a) {
  if (a->terms.empty()) return zero_node();
  if (leading_negative(*a)) return negate(atom_node(Atom{AtomKind::Atan, negate(a), {}}));
  return atom_node(Atom{AtomKind::Atan, a, {}});
}

inline NodePtr rebuild_atom(AtomKind k, const NodePtr& arg) {
  switch (k) {
    case AtomKind::Exp: return make_exp(arg);
    case AtomKind::Log: return make_log(arg);
    case AtomKind::Sin: return make_sin(arg);
    case AtomKind::Cos: return make_cos(arg);
    case AtomKind::Tan: return make_tan(arg);
    case AtomKind::Atan: return make_atan(arg);
    case AtomKind::Power: return arg;
    default: throw std::logic_error("rebuild_atom: atom has no argument");
  }
}

NodePtr diff(const NodePtr& n, Var v);

inline NodePtr diff_atom(const Atom& a, Var v) {
  switch (a.kind) {
    case AtomKind::T: return v == Var::t ? one_node() : zero_node();
    case AtomKind::X: return v == Var::x ? one_node() : zero_node();
    case AtomKind::Pi:
    case AtomKind::Radical: return zero_node();
    case AtomKind::Exp: return mul(atom_node(a), diff(a.arg, v));
    case AtomKind::Log: return mul(diff(a.arg, v), pow(a.arg, -1));
    case AtomKind::Sin: return mul(make_cos(a.arg), diff(a.arg, v));
    case AtomKind::Cos: return negate(mul(make_sin(a.arg), diff(a.arg, v)));
    case AtomKind::Tan: {
      NodePtr tan2 = atom_node(a, 2);
      return mul(add(one_node(), tan2), diff(a.arg, v));
    }
    case AtomKind::Atan:
      return mul(diff(a.arg, v), pow(add(one_node(), mul(a.arg, a.arg)), -1));
    case AtomKind::Power: return diff(a.arg, v);
  }
  return zero_node();
}

inline NodePtr factor_node(const Factor& f) {
  if (f.atom.kind == AtomKind::Power) return pow(f.atom.arg, f.exponent);
  return normalize_term(CRational(1), {f});
}

inline NodePtr diff(const NodePtr& n, Var v) {
  const unsigned bit = dep_bit(v);
  if (!(n->deps & bit)) return zero_node();
  std::vector<NodePtr> parts;
  for (const auto& t : n->terms) {
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      const Factor& f = t.factors[i];
      if (!(atom_deps(f.atom) & bit)) continue;
      std::vector<Factor> others;
      others.reserve(t.factors.size());
      for (std::size_t j = 0; j < t.factors.size(); ++j)
        if (j != i) others.push_back(t.factors[j]);
      // d(a^e) = e a^(e-1) a'
      std::vector<Factor> lowered = others;
      if (f.exponent != 1) {
        lowered.push_back(Factor{f.atom, f.exponent - 1});
        std::sort(lowered.begin(), lowered.end(),
                  [](const Factor& a, const Factor& b) { return compare_atom(a.atom, b.atom) < 0; });
      }
      NodePtr rest = normalize_term(t.coeff * CRational(f.exponent), lowered);
      parts.push_back(mul(rest, diff_atom(f.atom, v)));
    }
  }
  return sum_nodes(std::move(parts));
}

struct Substitution {
  std::optional<NodePtr> t;
  std::optional<NodePtr> x;
  unsigned mask() const { return (t ? kDepT : 0u) | (x ? kDepX : 0u); }
};

NodePtr subs(const NodePtr& n, const Substitution& s);

inline NodePtr subs_atom(const Atom& a, const Substitution& s) {
  switch (a.kind) {
    case AtomKind::T: return s.t ? *s.t : atom_node(a);
    case AtomKind::X: return s.x ? *s.x : atom_node(a);
    case AtomKind::Pi:
    case AtomKind::Radical: return atom_node(a);
    default: return rebuild_atom(a.kind, subs(a.arg, s));
  }
}

inline NodePtr subs(const NodePtr& n, const Substitution& s) {
  const unsigned mask = s.mask();
  if (!(n->deps & mask)) return n;
  std::vector<NodePtr> parts;
  parts.reserve(n->terms.size());
  for (const auto& t : n->terms) {
    std::vector<Factor> fixed;
    NodePtr acc = one_node();
    for (const auto& f : t.factors) {
      if (!(atom_deps(f.atom) & mask)) {
        fixed.push_back(f);
        continue;
      }
      acc = mul(acc, pow(subs_atom(f.atom, s), f.exponent));
    }
    parts.push_back(mul(normalize_term(t.coeff, fixed), acc));
  }
  return sum_nodes(std::move(parts));
}

NodePtr conj(const NodePtr& n);

inline NodePtr conj(const NodePtr& n) {
  std::vector<NodePtr> parts;
  parts.reserve(n->terms.size());
  for (const auto& t : n->terms) {
    NodePtr acc = const_node(t.coeff.conj());
    std::vector<Factor> plain;
    for (const auto& f : t.factors) {
      if (f.atom.arg && f.atom.kind != AtomKind::Radical) {
        acc = mul(acc, pow(rebuild_atom(f.atom.kind, conj(f.atom.arg)), f.exponent));
      } else {
        plain.push_back(f);
      }
    }
    parts.push_back(mul(acc, normalize_term(CRational(1), plain)));
  }
  return sum_nodes(std::move(parts));
}

std::complex<double> eval(const Node& n, double t, double x);

inline std::complex<double> eval_atom(const Atom& a, double t, double x) {
  switch (a.kind) {
    case AtomKind::Pi: return std::numbers::pi;
    case AtomKind::T: return t;
    case AtomKind::X: return x;
    case AtomKind::Radical: return to_double(a.radicand);  // the 1/2 lives on the factor
    case AtomKind::Exp: return std::exp(eval(*a.arg, t, x));
    case AtomKind::Log: {
      const auto u = eval(*a.arg, t, x);
      if (std::abs(u) < 1e-300) throw SingularityError("log of zero");
      return std::log(u);
    }
    case AtomKind::Sin: return std::sin(eval(*a.arg, t, x));
    case AtomKind::Cos: return std::cos(eval(*a.arg, t, x));
    case AtomKind::Tan: {
      const auto u = eval(*a.arg, t, x);
      if (std::abs(std::cos(u)) < 1e-12) throw SingularityError("tan pole");
      return std::tan(u);
    }
    case AtomKind::Atan: return std::atan(eval(*a.arg, t, x));
    case AtomKind::Power: return eval(*a.arg, t, x);
  }
  return 0.0;
}

inline std::complex<double> eval_factor(const Factor& f, double t, double x) {
  const std::complex<double> v = eval_atom(f.atom, t, x);
  if (f.exponent == 1) return v;
  if (f.exponent < 0 && std::abs(v) < 1e-12) throw SingularityError("division by (near) zero");
  if (is_integer(f.exponent)) {
    const long k = static_cast<long>(boost::multiprecision::numerator(f.exponent));
    std::complex<double> r = 1.0, b = k < 0 ? 1.0 / v : v;
    long m = k < 0 ? -k : k;
    while (m) {
      if (m & 1) r *= b;
      b *= b;
      m >>= 1;
    }
    return r;
  }
  return std::pow(v, to_double(f.exponent));
}

inline std::complex<double> eval_term(const Term& term, double t, double x) {
  std::complex<double> v = term.coeff_d;
  for (const auto& f : term.factors) v *= eval_factor(f, t, x);
  return v;
}

inline std::complex<double> eval(const Node& n, double t, double x) {
  std::complex<double> s = 0.0;
  for (const auto& term : n.terms) s += eval_term(term, t, x);
  return s;
}

std::string format(const Node& n);

inline std::string format_exponent(const Rational& e) {
  if (is_integer(e) && e >= 0) return to_string(e);
  return "(" + to_string(e) + ")";
}

inline std::string format_atom(const Atom& a) {
  switch (a.kind) {
    case AtomKind::Pi: return "pi";
    case AtomKind::T: return "t";
    case AtomKind::X: return "x";
    case AtomKind::Radical: return "sqrt(" + to_string(a.radicand) + ")";
    case AtomKind::Exp: return "exp(" + format(*a.arg) + ")";
    case AtomKind::Log: return "log(" + format(*a.arg) + ")";
    case AtomKind::Sin: return "sin(" + format(*a.arg) + ")";
    case AtomKind::Cos: return "cos(" + format(*a.arg) + ")";
    case AtomKind::Tan: return "tan(" + format(*a.arg) + ")";
    case AtomKind::Atan: return "atan(" + format(*a.arg) + ")";
    case AtomKind::Power: return "(" + format(*a.arg) + ")";
  }
  return "?";
}

inline std::string format_factor(const Factor& f) {
  if (f.atom.kind == AtomKind::Radical && f.exponent == Rational(1, 2)) return format_atom(f.atom);
  std::string base = format_atom(f.atom);
  if (f.atom.kind == AtomKind::Radical) base = "(" + to_string(f.atom.radicand) + ")";
  if (f.exponent == 1) return base;
  return base + "^" + format_exponent(f.exponent);
}

inline std::string format_term_abs(const Term& t, bool negate_coeff) {
  const CRational c = negate_coeff ? -t.coeff : t.coeff;
  std::string out;
  const bool unit = c.is_one();
  if (c == CRational::I() && !t.factors.empty()) out = "i";
  else if (!unit || t.factors.empty()) out = to_string(c);
  for (const auto& f : t.factors) {
    if (!out.empty()) out += "*";
    out += format_factor(f);
  }
  return out;
}

inline std::string format(const Node& n) {
  if (n.terms.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : n.terms) {
    const bool neg = t.coeff.is_real() ? t.coeff.is_negative() : (t.coeff.re == 0 && t.coeff.im < 0);
    if (first) {
      out += neg ? "-" + format_term_abs(t, true) : format_term_abs(t, false);
    } else {
      out += neg ? " - " + format_term_abs(t, true) : " + " + format_term_abs(t, false);
    }
    first = false;
  }
  return out;
}

}  // namespace detail

/// Symbolic expression in t and x with exact complex-rational constants.
class Expr {
 public:
  Expr() : node_(detail::zero_node()) {}
  Expr(int c) : node_(detail::const_node(CRational(c))) {}                // NOLINT(implicit)
  Expr(const Rational& c) : node_(detail::const_node(CRational(c))) {}    // NOLINT(implicit)
  Expr(const CRational& c) : node_(detail::const_node(c)) {}              // NOLINT(implicit)
  explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}

  static Expr t() { return Expr(detail::atom_node(detail::Atom{detail::AtomKind::T, nullptr, {}})); }
  static Expr x() { return Expr(detail::atom_node(detail::Atom{detail::AtomKind::X, nullptr, {}})); }
  static Expr var(Var v) { return v == Var::t ? t() : x(); }
  static Expr i() { return Expr(CRational::I()); }
  static Expr pi() { return Expr(detail::atom_node(detail::Atom{detail::AtomKind::Pi, nullptr, {}})); }

  const detail::NodePtr& node() const { return node_; }

  friend Expr operator+(const Expr& a, const Expr& b) { return Expr(detail::add(a.node_, b.node_)); }
  friend Expr operator-(const Expr& a, const Expr& b) { return Expr(detail::add(a.node_, detail::negate(b.node_))); }
  friend Expr operator-(const Expr& a) { return Expr(detail::negate(a.node_)); }
  friend Expr operator*(const Expr& a, const Expr& b) { return Expr(detail::mul(a.node_, b.node_)); }
  friend Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_zero()) throw std::domain_error("division by the zero expression");
    return Expr(detail::mul(a.node_, detail::pow(b.node_, -1)));
  }
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

  /// Structural equality of canonical forms.
  friend bool operator==(const Expr& a, const Expr& b) { return detail::compare_node(*a.node_, *b.node_) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
  friend bool operator<(const Expr& a, const Expr& b) { return detail::compare_node(*a.node_, *b.node_) < 0; }

  bool is_zero() const { return node_->terms.empty(); }
  std::optional<CRational> constant_value() const { return detail::as_constant(*node_); }
  bool is_constant() const { return constant_value().has_value(); }
  bool depends_on(Var v) const { return node_->deps & detail::dep_bit(v); }
  std::size_t term_count() const { return node_->terms.size(); }

  /// Each canonical term as its own expression.
  std::vector<Expr> terms() const {
    std::vector<Expr> out;
    for (const auto& t : node_->terms) out.emplace_back(detail::raw_monomial(t.coeff, t.factors));
    return out;
  }

  /// Coefficient of the term with no factors.
  CRational constant_term() const {
    for (const auto& t : node_->terms)
      if (t.factors.empty()) return t.coeff;
    return CRational(0);
  }

  NodeKind kind() const {
    const auto& terms = node_->terms;
    if (terms.empty()) return NodeKind::Const;
    if (terms.size() > 1) return NodeKind::Sum;
    const auto& t = terms.front();
    if (t.factors.empty()) return NodeKind::Const;
    if (!t.coeff.is_one() || t.factors.size() > 1) return NodeKind::Prod;
    const auto& f = t.factors.front();
    if (f.atom.kind == detail::AtomKind::Radical) return NodeKind::Radical;
    if (f.exponent != 1 || f.atom.kind == detail::AtomKind::Power) return NodeKind::Pow;
    switch (f.atom.kind) {
      case detail::AtomKind::T:
      case detail::AtomKind::X: return NodeKind::Var;
      case detail::AtomKind::Pi: return NodeKind::Pi;
      case detail::AtomKind::Exp: return NodeKind::Exp;
      case detail::AtomKind::Log: return NodeKind::Log;
      case detail::AtomKind::Sin: return NodeKind::Sin;
      case detail::AtomKind::Cos: return NodeKind::Cos;
      case detail::AtomKind::Tan: return NodeKind::Tan;
      case detail::AtomKind::Atan: return NodeKind::Atan;
      default: return NodeKind::Prod;
    }
  }

  /// Operands of the top-level node: summands for Sum, [coefficient, factors...]
  /// for Prod, [base, exponent] for Pow, [argument] for function nodes.
  std::vector<Expr> children() const {
    const auto k = kind();
    if (k == NodeKind::Sum) return terms();
    if (k == NodeKind::Const || k == NodeKind::Var || k == NodeKind::Pi || k == NodeKind::Radical) return {};
    const auto& t = node_->terms.front();
    if (k == NodeKind::Prod) {
      std::vector<Expr> out;
      if (!t.coeff.is_one()) out.emplace_back(t.coeff);
      for (const auto& f : t.factors) out.emplace_back(detail::normalize_term(CRational(1), {f}));
      return out;
    }
    const auto& f = t.factors.front();
    if (k == NodeKind::Pow) {
      Expr base = f.atom.kind == detail::AtomKind::Power ? Expr(f.atom.arg) : Expr(detail::atom_node(f.atom));
      return {base, Expr(f.exponent)};
    }
    return {Expr(f.atom.arg)};
  }

  Expr pow(const Rational& e) const { return Expr(detail::pow(node_, e)); }
  Expr pow(int e) const { return pow(Rational(e)); }
  Expr sqrt() const { return pow(Rational(1, 2)); }
  Expr diff(Var v) const { return Expr(detail::diff(node_, v)); }

  /// Simultaneous substitution of t and/or x.
  Expr subs(const std::optional<Expr>& t_to, const std::optional<Expr>& x_to) const {
    detail::Substitution s;
    if (t_to) s.t = t_to->node_;
    if (x_to) s.x = x_to->node_;
    return Expr(detail::subs(node_, s));
  }
  Expr subs_t(const Expr& e) const { return subs(e, std::nullopt); }
  Expr subs_x(const Expr& e) const { return subs(std::nullopt, e); }

  /// Complex conjugate, treating every atom as real-valued on real arguments.
  Expr conj() const { return Expr(detail::conj(node_)); }
  Expr real_part() const { return (*this + conj()) * Expr(CRational(Rational(1, 2))); }
  Expr imag_part() const { return (*this - conj()) * Expr(CRational(Rational(0), Rational(-1, 2))); }

  std::complex<double> eval(double t, double x = 0.0) const { return detail::eval(*node_, t, x); }

  /// Values of the individual canonical terms; used for magnitude scaling.
  void eval_terms(double t, double x, std::vector<std::complex<double>>& out) const {
    out.clear();
    for (const auto& term : node_->terms) out.push_back(detail::eval_term(term, t, x));
  }

  std::string str() const { return detail::format(*node_); }

 private:
  detail::NodePtr node_;
};

inline Expr pow(const Expr& e, const Rational& k) { return e.pow(k); }
inline Expr exp(const Expr& e) { return Expr(detail::make_exp(e.node())); }
inline Expr log(const Expr& e) { return Expr(detail::make_log(e.node())); }
inline Expr sin(const Expr& e) { return Expr(detail::make_sin(e.node())); }
inline Expr cos(const Expr& e) { return Expr(detail::make_cos(e.node())); }
inline Expr tan(const Expr& e) { return Expr(detail::make_tan(e.node())); }
inline Expr atan(const Expr& e) { return Expr(detail::make_atan(e.node())); }
inline Expr sqrt(const Expr& e) { return e.sqrt(); }

inline Expr constant(std::int64_t num, std::int64_t den = 1) { return Expr(make_rational(num, den)); }
inline Expr constant(const Rational& re, const Rational& im) { return Expr(CRational(re, im)); }

inline Expr differentiate(const Expr& e, Var v) { return e.diff(v); }
inline std::complex<double> eval_numeric(const Expr& e, double t, double x) { return e.eval(t, x); }
inline std::string format(const Expr& e) { return e.str(); }

/// Expressions are canonical on construction; normalize is the identity.
inline Expr normalize(const Expr& e) { return e; }

/// Coefficients of e as a Laurent polynomial in x, keyed by power.
inline std::map<long, Expr> x_laurent_decompose(const Expr& e) {
  using namespace detail;
  std::map<long, std::vector<NodePtr>> parts;
  for (const auto& term : e.node()->terms) {
    long power = 0;
    std::vector<Factor> rest;
    for (const auto& f : term.factors) {
      if (f.atom.kind == AtomKind::X) {
        if (!is_integer(f.exponent)) throw NotLaurentInX("non-integer power of x: " + e.str());
        power = static_cast<long>(boost::multiprecision::numerator(f.exponent));
      } else if (atom_deps(f.atom) & kDepX) {
        throw NotLaurentInX("x inside " + format_atom(f.atom));
      } else {
        rest.push_back(f);
      }
    }
    parts[power].push_back(raw_monomial(term.coeff, std::move(rest)));
  }
  std::map<long, Expr> out;
  for (auto& [k, v] : parts) out.emplace(k, Expr(sum_nodes(std::move(v))));
  return out;
}

inline bool is_laurent_in_x(const Expr& e) {
  try {
    x_laurent_decompose(e);
    return true;
  } catch (const NotLaurentInX&) {
    return false;
  }
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.str(); }

}  // namespace nlsgc
