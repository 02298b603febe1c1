#pragma once

/// Sample plans and the numeric zero test that backs every "residual == 0" claim.
///
/// Policy: a residual that normalizes to the literal zero is ProvedZero, a
/// nonzero constant is ProvedNonzero. Anything else is sampled on the plan's
/// points (skipping points within the exclusion radius of a singularity of the
/// expression) and compared against tolerance * max(1, largest term magnitude).
/// Identities beyond the normalizer (sin^2+cos^2, rational cancellations) are
/// therefore decided numerically; a pathological expression that vanishes on
/// every sample point but not identically would be misjudged.

#include "nlsgc/expr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nlsgc {

struct Interval {
  double lo = -3.0;
  double hi = 3.0;
  bool contains(double v) const { return v > lo && v < hi; }
};

struct Exclusion {
  Var var = Var::t;
  double location = 0.0;
  double radius = 0.15;
};

struct SamplePlan {
  std::vector<double> t_samples;
  std::vector<double> x_samples;  // paired with t_samples
  std::vector<Exclusion> excluded;
  double tolerance = 1e-9;

  std::size_t size() const { return t_samples.size(); }

  bool excludes(double t, double x) const {
    for (const auto& e : excluded) {
      const double v = e.var == Var::t ? t : x;
      if (std::abs(v - e.location) < e.radius) return true;
    }
    return false;
  }
};

struct PlanOptions {
  std::uint64_t seed = 20040601;
  std::size_t count = 256;
  Interval t_range{-3.0, 3.0};
  Interval x_range{-3.0, 3.0};
  double tolerance = 1e-9;
  double radius = 0.15;
};

namespace detail {

/// Real roots of a polynomial (degree <= 2) in a single variable, if n is one.
inline std::optional<std::pair<Var, std::vector<double>>> linear_or_quadratic_roots(const Node& n) {
  if (!(n.deps == kDepT || n.deps == kDepX)) return std::nullopt;
  const Var v = n.deps == kDepT ? Var::t : Var::x;
  double c[3] = {0, 0, 0};
  for (const auto& term : n.terms) {
    if (!term.coeff.is_real()) return std::nullopt;
    if (term.factors.empty()) {
      c[0] += to_double(term.coeff.re);
      continue;
    }
    if (term.factors.size() != 1) return std::nullopt;
    const auto& f = term.factors[0];
    if (!(f.atom.kind == AtomKind::T || f.atom.kind == AtomKind::X)) return std::nullopt;
    if (f.exponent == 1) c[1] += to_double(term.coeff.re);
    else if (f.exponent == 2) c[2] += to_double(term.coeff.re);
    else return std::nullopt;
  }
  std::vector<double> roots;
  if (c[2] == 0) {
    if (c[1] != 0) roots.push_back(-c[0] / c[1]);
  } else {
    const double disc = c[1] * c[1] - 4 * c[2] * c[0];
    if (disc >= 0) {
      roots.push_back((-c[1] - std::sqrt(disc)) / (2 * c[2]));
      roots.push_back((-c[1] + std::sqrt(disc)) / (2 * c[2]));
    }
  }
  return std::make_pair(v, roots);
}

inline void collect_singularities(const Node& n, std::vector<Exclusion>& out, double radius, const Interval& span) {
  auto push = [&](Var v, double loc) {
    for (const auto& e : out)
      if (e.var == v && std::abs(e.location - loc) < 1e-12) return;
    out.push_back(Exclusion{v, loc, radius});
  };
  for (const auto& term : n.terms) {
    for (const auto& f : term.factors) {
      const auto& a = f.atom;
      const bool singular_power = f.exponent < 0 || !is_integer(f.exponent);
      if (a.kind == AtomKind::T && singular_power) push(Var::t, 0.0);
      if (a.kind == AtomKind::X && singular_power) push(Var::x, 0.0);
      if ((a.kind == AtomKind::Power && singular_power) || a.kind == AtomKind::Log) {
        if (auto r = linear_or_quadratic_roots(*a.arg))
          for (double root : r->second) push(r->first, root);
      }
      if (a.kind == AtomKind::Tan) {
        // poles of tan(k v + c)
        const Node& arg = *a.arg;
        if ((arg.deps == kDepT || arg.deps == kDepX) && arg.terms.size() <= 2) {
          double k = 0, c0 = 0;
          bool linear = true;
          for (const auto& term2 : arg.terms) {
            if (term2.factors.empty()) c0 = to_double(term2.coeff.re);
            else if (term2.factors.size() == 1 && term2.factors[0].exponent == 1 &&
                     (term2.factors[0].atom.kind == AtomKind::T || term2.factors[0].atom.kind == AtomKind::X))
              k = to_double(term2.coeff.re);
            else linear = false;
          }
          if (linear && k != 0) {
            const Var v = arg.deps == kDepT ? Var::t : Var::x;
            const double lo = std::min(span.lo, -6.0), hi = std::max(span.hi, 6.0);
            for (int m = -64; m <= 64; ++m) {
              const double loc = ((m + 0.5) * std::numbers::pi - c0) / k;
              if (loc > lo && loc < hi) push(v, loc);
            }
          }
        }
      }
      if (a.arg && a.kind != AtomKind::Radical) collect_singularities(*a.arg, out, radius, span);
    }
  }
}

}  // namespace detail

/// Declared singular loci of e (poles at t=0 or x=0, roots of linear or
/// quadratic bases under negative powers, log arguments, tan poles).
inline std::vector<Exclusion> singularities(const Expr& e, double radius = 0.15, Interval span = {}) {
  std::vector<Exclusion> out;
  detail::collect_singularities(*e.node(), out, radius, span);
  return out;
}

/// Builds a plan avoiding the singularities of every expression in `exprs`.
inline SamplePlan make_plan(const PlanOptions& opt, const std::vector<Expr>& exprs = {}) {
  SamplePlan plan;
  plan.tolerance = opt.tolerance;
  for (const auto& e : exprs)
    for (const auto& ex : singularities(e, opt.radius, opt.t_range)) plan.excluded.push_back(ex);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ut(opt.t_range.lo, opt.t_range.hi);
  std::uniform_real_distribution<double> ux(opt.x_range.lo, opt.x_range.hi);
  std::size_t attempts = 0;
  while (plan.t_samples.size() < opt.count && attempts < opt.count * 1000) {
    ++attempts;
    const double t = ut(rng), x = ux(rng);
    if (plan.excludes(t, x)) continue;
    plan.t_samples.push_back(t);
    plan.x_samples.push_back(x);
  }
  return plan;
}

enum class ZeroVerdict { ProvedZero, ProvedNonzero, ProbablyZero, ProbablyNonzero };

inline const char* to_string(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::ProvedZero: return "ProvedZero";
    case ZeroVerdict::ProvedNonzero: return "ProvedNonzero";
    case ZeroVerdict::ProbablyZero: return "ProbablyZero";
    case ZeroVerdict::ProbablyNonzero: return "ProbablyNonzero";
  }
  return "?";
}

enum class Grade { Proved, Probable };

inline const char* to_string(Grade g) { return g == Grade::Proved ? "Proved" : "Probable"; }

struct ZeroTest {
  ZeroVerdict verdict = ZeroVerdict::ProvedZero;
  double max_residual = 0.0;  // max |e| / scale
  double max_abs = 0.0;
  double scale = 1.0;
  double tolerance = 0.0;
  std::size_t points = 0;
  std::optional<std::pair<double, double>> witness;  // (t, x) of the largest |e|

  bool zero() const { return verdict == ZeroVerdict::ProvedZero || verdict == ZeroVerdict::ProbablyZero; }
  Grade grade() const {
    return (verdict == ZeroVerdict::ProvedZero || verdict == ZeroVerdict::ProvedNonzero) ? Grade::Proved
                                                                                          : Grade::Probable;
  }
};

inline ZeroTest is_zero(const Expr& e, const SamplePlan& plan) {
  ZeroTest r;
  r.tolerance = plan.tolerance;
  if (e.is_zero()) return r;
  if (auto c = e.constant_value()) {
    r.verdict = ZeroVerdict::ProvedNonzero;
    r.max_abs = std::abs(c->to_complex());
    r.max_residual = r.max_abs;
    r.witness = std::make_pair(plan.t_samples.empty() ? 0.0 : plan.t_samples[0],
                               plan.x_samples.empty() ? 0.0 : plan.x_samples[0]);
    return r;
  }
  const auto own = singularities(e);
  std::vector<std::complex<double>> term_values;
  double max_term = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const double t = plan.t_samples[k], x = plan.x_samples[k];
    bool skip = false;
    for (const auto& s : own)
      if (std::abs((s.var == Var::t ? t : x) - s.location) < s.radius) skip = true;
    if (skip) continue;
    try {
      e.eval_terms(t, x, term_values);
    } catch (const SingularityError&) {
      continue;
    }
    std::complex<double> sum = 0.0;
    for (const auto& v : term_values) {
      sum += v;
      max_term = std::max(max_term, std::abs(v));
    }
    const double a = std::abs(sum);
    if (!std::isfinite(a)) continue;
    ++r.points;
    if (a > r.max_abs || !r.witness) {
      r.max_abs = std::max(r.max_abs, a);
      if (a >= r.max_abs) r.witness = std::make_pair(t, x);
    }
  }
  r.scale = std::max(1.0, max_term);
  r.max_residual = r.max_abs / r.scale;
  r.verdict = (r.points > 0 && r.max_residual < plan.tolerance) ? ZeroVerdict::ProbablyZero
                                                                 : ZeroVerdict::ProbablyNonzero;
  return r;
}

}  // namespace nlsgc
