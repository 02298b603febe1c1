#pragma once

/// Equivalence transformations of the class: t~ = T(t), x~ = sqrt(T_t) x + X(t),
/// psi~ picks up the phase Psi(t), plus the reflections I_x (x -> -x) and
/// I_t (t -> -t with complex conjugation). Potentials transform as
///
///   V~ = [V + (r_t/8) x^2 + (b_t/2) x + i (gh/4) r - (r x/4 + b/2)^2 + Psi_t] / T_t
///
/// with r = T_tt/T_t and b = X_t/sqrt(T_t), written back in the new variables.

#include "nlsgc/expr.hpp"
#include "nlsgc/invariance.hpp"
#include "nlsgc/parse.hpp"
#include "nlsgc/sampling.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsgc {

struct UnregisteredInverse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class TimeFamily { Affine, Mobius, Exponential, Tan, Composite, Custom };

inline const char* to_string(TimeFamily f) {
  switch (f) {
    case TimeFamily::Affine: return "affine";
    case TimeFamily::Mobius: return "mobius";
    case TimeFamily::Exponential: return "exponential";
    case TimeFamily::Tan: return "tan";
    case TimeFamily::Composite: return "composite";
    case TimeFamily::Custom: return "custom";
  }
  return "?";
}

/// Increasing time reparametrization T on an open interval, with the positive
/// root sqrt(T_t) written out per family so that it is correct on the branch.
struct TimeMap {
  TimeFamily family = TimeFamily::Affine;
  std::vector<Rational> params{Rational(1), Rational(0)};  // affine {a,b}; mobius {a1,a0,b1,b0}; exponential {c,k,d}; tan {k}
  Expr T = Expr::t();
  Expr sqrt_Tt = 1;
  std::optional<Expr> inverse = Expr::t();
  Interval domain{-kInf, kInf};
  Interval image{-kInf, kInf};

  /// Numeric T^{-1}; bisection when no symbolic inverse is known.
  double inverse_value(double s) const {
    if (inverse) return inverse->eval(s).real();
    double lo = std::isfinite(domain.lo) ? domain.lo : -1e6, hi = std::isfinite(domain.hi) ? domain.hi : 1e6;
    const double w = (hi - lo) * 1e-12;
    lo += w;
    hi -= w;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (T.eval(mid).real() < s) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  static TimeMap identity() { return affine(1, 0); }

  static TimeMap affine(const Rational& a, const Rational& b) {
    if (a <= 0) throw DomainViolation("affine T = a t + b needs a > 0");
    TimeMap m;
    m.family = TimeFamily::Affine;
    m.params = {a, b};
    const Expr t = Expr::t();
    m.T = Expr(a) * t + Expr(b);
    m.sqrt_Tt = Expr(a).sqrt();
    m.inverse = (t - Expr(b)) / Expr(a);
    return m;
  }

  /// (a1 t + a0)/(b1 t + b0), det = a1 b0 - a0 b1 > 0. For b1 != 0 the branch is
  /// t > pole when upper, t < pole otherwise.
  static TimeMap mobius(const Rational& a1, const Rational& a0, const Rational& b1, const Rational& b0,
                        bool upper = true) {
    const Rational det = a1 * b0 - a0 * b1;
    if (det <= 0) throw DomainViolation("Mobius T needs a1 b0 - a0 b1 > 0");
    if (b1 == 0) return affine(a1 / b0, a0 / b0);
    TimeMap m;
    m.family = TimeFamily::Mobius;
    m.params = {a1, a0, b1, b0};
    const Expr t = Expr::t();
    const Expr den = Expr(b1) * t + Expr(b0);
    m.T = (Expr(a1) * t + Expr(a0)) / den;
    const double pole = -to_double(b0 / b1);
    const double limit = to_double(a1 / b1);
    // sign of b1 t + b0 on the branch
    const int s = (upper == (b1 > 0)) ? 1 : -1;
    m.sqrt_Tt = Expr(s) * Expr(det).sqrt() / den;
    // inverse of (a1 t + a0)/(b1 t + b0) is (b0 t - a0)/(-b1 t + a1)
    m.inverse = (Expr(b0) * t - Expr(a0)) / (Expr(-b1) * t + Expr(a1));
    if (upper) {
      m.domain = {pole, kInf};
      m.image = {-kInf, limit};
    } else {
      m.domain = {-kInf, pole};
      m.image = {limit, kInf};
    }
    return m;
  }

  /// The tau map T = -1/t on t > 0 (upper) or t < 0.
  static TimeMap tau(bool upper = true) { return mobius(0, -1, 1, 0, upper); }

  /// c e^{kt} + d with c k > 0.
  static TimeMap exponential(const Rational& c, const Rational& k, const Rational& d) {
    if (!(c * k > 0)) throw DomainViolation("exponential T = c e^{kt} + d needs c k > 0");
    TimeMap m;
    m.family = TimeFamily::Exponential;
    m.params = {c, k, d};
    const Expr t = Expr::t();
    m.T = Expr(c) * exp(Expr(k) * t) + Expr(d);
    m.sqrt_Tt = Expr(c * k).sqrt() * exp(Expr(k / 2) * t);
    m.inverse = Expr(1 / k) * log((t - Expr(d)) / Expr(c));
    m.image = c > 0 ? Interval{to_double(d), kInf} : Interval{-kInf, to_double(d)};
    return m;
  }

  /// tan(k t) on |t| < pi/(2k), k > 0.
  static TimeMap tan_map(const Rational& k) {
    if (k <= 0) throw DomainViolation("tan(k t) needs k > 0");
    TimeMap m;
    m.family = TimeFamily::Tan;
    m.params = {k};
    const Expr t = Expr::t();
    m.T = tan(Expr(k) * t);
    m.sqrt_Tt = Expr(k).sqrt() / cos(Expr(k) * t);
    m.inverse = atan(t) / Expr(k);
    const double h = std::numbers::pi / (2 * to_double(k));
    m.domain = {-h, h};
    return m;
  }

  /// Unregistered T: sqrt(T_t) is the formal principal root and no inverse is known.
  static TimeMap custom(const Expr& T, Interval domain = {-kInf, kInf}) {
    TimeMap m;
    m.family = TimeFamily::Custom;
    m.T = T;
    m.sqrt_Tt = T.diff(Var::t).sqrt();
    m.inverse.reset();
    m.domain = domain;
    m.image = {-kInf, kInf};
    auto end = [&](double v, double fallback) {
      if (!std::isfinite(v)) return fallback;
      try {
        return T.eval(v).real();
      } catch (const SingularityError&) {
        return fallback;
      }
    };
    m.image = {end(domain.lo, -kInf), end(domain.hi, kInf)};
    return m;
  }

  bool registered() const { return family != TimeFamily::Custom; }
  bool invertible_family() const { return family == TimeFamily::Affine || family == TimeFamily::Mobius; }
};

namespace detail {

inline Interval intersect(const Interval& a, const Interval& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

inline bool empty(const Interval& a) { return !(a.lo < a.hi); }

inline std::optional<std::vector<Rational>> mobius_matrix(const TimeMap& m) {
  if (m.family == TimeFamily::Affine) return std::vector<Rational>{m.params[0], m.params[1], 0, 1};
  if (m.family == TimeFamily::Mobius) return m.params;
  return std::nullopt;
}

}  // namespace detail

/// T'(t) = -T(-t): the continuous part seen through the time reflection.
inline TimeMap reflect_time(const TimeMap& m) {
  const Expr mt = -Expr::t();
  switch (m.family) {
    case TimeFamily::Affine: return TimeMap::affine(m.params[0], -m.params[1]);
    case TimeFamily::Mobius:
      return TimeMap::mobius(m.params[0], -m.params[1], -m.params[2], m.params[3], !(m.domain.lo > -kInf));
    case TimeFamily::Exponential: return TimeMap::exponential(-m.params[0], -m.params[1], -m.params[2]);
    case TimeFamily::Tan: return m;
    default: break;
  }
  TimeMap r = m;
  r.T = -m.T.subs_t(mt);
  r.sqrt_Tt = m.sqrt_Tt.subs_t(mt);
  if (m.inverse) r.inverse = -m.inverse->subs_t(mt);
  r.domain = {-m.domain.hi, -m.domain.lo};
  r.image = {-m.image.hi, -m.image.lo};
  return r;
}

/// A Mobius m1 whose branch misses the image of m2 is switched to its other branch.
inline TimeMap align_branch(TimeMap m1, const TimeMap& m2) {
  if (m1.family == TimeFamily::Mobius && detail::empty(detail::intersect(m1.domain, m2.image)))
    m1 = TimeMap::mobius(m1.params[0], m1.params[1], m1.params[2], m1.params[3], !(m1.domain.lo > -kInf));
  return m1;
}

/// m1 after m2.
inline TimeMap compose_time(TimeMap m1, const TimeMap& m2) {
  using detail::intersect;
  m1 = align_branch(std::move(m1), m2);
  const Interval meet = intersect(m1.domain, m2.image);
  if (detail::empty(meet)) throw DomainViolation("image of the first map misses the domain of the second");
  // domain of the composite: preimage of meet under T2
  Interval dom = m2.domain;
  if (meet.lo > m2.image.lo) dom.lo = m2.inverse_value(meet.lo);
  if (meet.hi < m2.image.hi) dom.hi = m2.inverse_value(meet.hi);
  Interval img = m1.image;
  if (meet.lo > m1.domain.lo) img.lo = m1.T.eval(meet.lo).real();
  if (meet.hi < m1.domain.hi) img.hi = m1.T.eval(meet.hi).real();

  if (auto A = detail::mobius_matrix(m1)) {
    if (auto B = detail::mobius_matrix(m2)) {
      const auto& a = *A;
      const auto& b = *B;
      const Rational a1 = a[0] * b[0] + a[1] * b[2], a0 = a[0] * b[1] + a[1] * b[3];
      const Rational b1 = a[2] * b[0] + a[3] * b[2], b0 = a[2] * b[1] + a[3] * b[3];
      if (b1 == 0) return TimeMap::affine(a1 / b0, a0 / b0);
      const double pole = -to_double(b0 / b1);
      const double probe = std::isfinite(dom.lo) ? (std::isfinite(dom.hi) ? 0.5 * (dom.lo + dom.hi) : dom.lo + 1)
                                                 : (std::isfinite(dom.hi) ? dom.hi - 1 : pole + 1);
      TimeMap out = TimeMap::mobius(a1, a0, b1, b0, probe > pole);
      out.domain = intersect(out.domain, dom);
      return out;
    }
  }
  if (m1.family == TimeFamily::Affine && m2.family == TimeFamily::Exponential) {
    const auto& p = m2.params;
    return TimeMap::exponential(m1.params[0] * p[0], p[1], m1.params[0] * p[2] + m1.params[1]);
  }
  if (m1.family == TimeFamily::Exponential && m2.family == TimeFamily::Affine && m2.params[1] == 0) {
    const auto& p = m1.params;
    return TimeMap::exponential(p[0], p[1] * m2.params[0], p[2]);
  }
  TimeMap out;
  out.family = (m1.registered() && m2.registered()) ? TimeFamily::Composite : TimeFamily::Custom;
  out.T = m1.T.subs_t(m2.T);
  out.sqrt_Tt = m1.sqrt_Tt.subs_t(m2.T) * m2.sqrt_Tt;
  if (m1.inverse && m2.inverse) out.inverse = m2.inverse->subs_t(*m1.inverse);
  else out.inverse.reset();
  out.domain = dom;
  out.image = img;
  return out;
}

/// Finite equivalence transformation: the continuous part (T, X, Psi) acts
/// first, then the reflections.
struct EquivMap {
  TimeMap time;
  Expr X;
  Expr Psi;
  bool reflect_x = false;
  bool reflect_t = false;

  static EquivMap identity() { return {}; }
  static EquivMap tau(bool upper = true) {
    EquivMap m;
    m.time = TimeMap::tau(upper);
    return m;
  }
  static EquivMap Ix() {
    EquivMap m;
    m.reflect_x = true;
    return m;
  }
  static EquivMap It() {
    EquivMap m;
    m.reflect_t = true;
    return m;
  }
  bool continuous_identity() const {
    return time.family == TimeFamily::Affine && time.params[0] == 1 && time.params[1] == 0 && X.is_zero() &&
           Psi.diff(Var::t).is_zero();
  }
};

/// Continuous part conjugated by a reflection: R C R.
inline EquivMap conjugate_by(const EquivMap& c, bool rx, bool rt) {
  EquivMap out = c;
  out.reflect_x = out.reflect_t = false;
  if (rx) out.X = -out.X;
  if (rt) {
    const Expr mt = -Expr::t();
    out.time = reflect_time(out.time);
    out.X = out.X.subs_t(mt);
    out.Psi = -out.Psi.subs_t(mt);
  }
  return out;
}

namespace detail {

/// V~ in the old variables (no inversion of T).
inline Expr transformed_in_old_variables(const EquivMap& m, const ModelParams& p, const Expr& V) {
  const Expr x = Expr::x();
  const Expr Tt = m.time.T.diff(Var::t);
  const Expr r = Tt.diff(Var::t) / Tt;
  const Expr b = m.X.diff(Var::t) / m.time.sqrt_Tt;
  const Expr lin = constant(1, 4) * r * x + constant(1, 2) * b;
  const Expr bracket = V + constant(1, 8) * r.diff(Var::t) * x * x + constant(1, 2) * b.diff(Var::t) * x +
                       Expr::i() * Expr(p.gamma_hat / 4) * r - lin * lin + m.Psi.diff(Var::t);
  return bracket / Tt;
}

inline Expr apply_reflections(const Expr& v, bool rx, bool rt) {
  Expr out = v;
  if (rx) out = out.subs_x(-Expr::x());
  if (rt) out = out.subs_t(-Expr::t()).conj();
  return out;
}

}  // namespace detail

/// Samples T_t > 0 and sqrt(T_t)^2 = T_t over the plan's t values inside the domain.
inline void check_domain(const TimeMap& tm, const SamplePlan& plan) {
  for (double t : plan.t_samples) {
    if (!tm.domain.contains(t)) continue;
    std::complex<double> tt, s;
    try {
      tt = tm.T.diff(Var::t).eval(t);
      s = tm.sqrt_Tt.eval(t);
    } catch (const SingularityError&) {
      continue;
    }
    if (!(tt.real() > 0) || std::abs(tt.imag()) > 1e-9 * std::abs(tt))
      throw DomainViolation("T_t <= 0 at t = " + std::to_string(t));
    if (!(s.real() > 0) || std::abs(s * s - tt) > 1e-8 * std::abs(tt))
      throw DomainViolation("sqrt(T_t) off branch at t = " + std::to_string(t));
  }
}

inline Potential apply_to_potential(const EquivMap& m, const ModelParams& p, const Potential& V) {
  Expr out = V.v;
  if (!m.continuous_identity()) {
    if (!m.time.inverse)
      throw UnregisteredInverse("T = " + m.time.T.str() + " is not in a registered family; use apply_numeric");
    const Expr old = detail::transformed_in_old_variables(m, p, V.v);
    const Expr& inv = *m.time.inverse;
    const Expr new_x = (Expr::x() - m.X.subs_t(inv)) / m.time.sqrt_Tt.subs_t(inv);
    out = old.subs(inv, new_x);
  }
  return Potential(detail::apply_reflections(out, m.reflect_x, m.reflect_t), V.params);
}

/// V~(t, x) evaluated without a symbolic inverse (root finding on T).
inline std::complex<double> apply_numeric(const EquivMap& m, const ModelParams& p, const Potential& V, double t,
                                          double x) {
  double tn = m.reflect_t ? -t : t;
  double xn = m.reflect_x ? -x : x;
  std::complex<double> v;
  if (m.continuous_identity()) {
    v = V.v.eval(tn, xn);
  } else {
    const Expr old = detail::transformed_in_old_variables(m, p, V.v);
    const double to = m.time.inverse_value(tn);
    const double xo = ((xn - m.X.eval(to)) / m.time.sqrt_Tt.eval(to)).real();
    v = old.eval(to, xo);
  }
  return m.reflect_t ? std::conj(v) : v;
}

/// m1 after m2.
inline EquivMap compose(const EquivMap& m1, const EquivMap& m2) {
  if (m1.continuous_identity() && !m1.reflect_x && !m1.reflect_t) return m2;
  // R1 C1 R2 C2 = (R1 R2) (R2 C1 R2) C2
  EquivMap c1 = conjugate_by(m1, m2.reflect_x, m2.reflect_t);
  // the branch of sqrt(T1_t) must be the one compose_time selects
  c1.time = align_branch(c1.time, m2.time);
  EquivMap out;
  out.time = compose_time(c1.time, m2.time);
  const Expr& T2 = m2.time.T;
  const Expr s1 = c1.time.sqrt_Tt;
  const Expr T1t = c1.time.T.diff(Var::t);
  const Expr r1 = T1t.diff(Var::t) / T1t;
  const Expr b1 = c1.X.diff(Var::t) / s1;
  out.X = m2.X * s1.subs_t(T2) + c1.X.subs_t(T2);
  out.Psi = m2.Psi + c1.Psi.subs_t(T2) + constant(1, 8) * r1.subs_t(T2) * m2.X * m2.X +
            constant(1, 2) * b1.subs_t(T2) * m2.X;
  out.reflect_x = m1.reflect_x != m2.reflect_x;
  out.reflect_t = m1.reflect_t != m2.reflect_t;
  return out;
}

/// Inverse map; only affine and Mobius T are registered as invertible.
inline EquivMap invert(const EquivMap& m) {
  if (!m.time.invertible_family())
    throw UnregisteredInverse("no registered inverse for T = " + m.time.T.str() +
                              " (numeric-only inverse available via TimeMap::inverse_value)");
  const Expr& inv = *m.time.inverse;
  const Expr s = m.time.sqrt_Tt;
  const Expr Tt = m.time.T.diff(Var::t);
  const Expr r = Tt.diff(Var::t) / Tt;
  const Expr b = m.X.diff(Var::t) / s;
  EquivMap c;
  const std::vector<Rational> P = *detail::mobius_matrix(m.time);
  // adjugate of [[a1,a0],[b1,b0]]
  c.time = TimeMap::mobius(P[3], -P[1], -P[2], P[0], true);
  if (c.time.family == TimeFamily::Mobius) {
    const bool upper = m.time.image.lo > -kInf;
    c.time = TimeMap::mobius(P[3], -P[1], -P[2], P[0], upper);
  }
  c.X = (-m.X / s).subs_t(inv);
  c.Psi = (-m.Psi - r * m.X * m.X / (8 * s * s) + b * m.X / (2 * s)).subs_t(inv);
  // m = R C, so m^{-1} = C^{-1} R = R (R C^{-1} R)
  EquivMap out = conjugate_by(c, m.reflect_x, m.reflect_t);
  out.reflect_x = m.reflect_x;
  out.reflect_t = m.reflect_t;
  return out;
}

// ---------------------------------------------------------------------------
// Recognition of T given as text, and JSON

namespace detail {

inline std::optional<TimeMap> recognize_mobius(const Expr& T) {
  std::vector<double> ts = {0.37, 0.81, 1.23, 1.9, 2.6, -0.55, -1.7, 3.3};
  std::vector<std::array<double, 4>> rows;
  for (double t : ts) {
    try {
      const auto v = T.eval(t);
      if (std::abs(v.imag()) > 1e-12 || !std::isfinite(v.real())) return std::nullopt;
      // T (b1 t + b0) - (a1 t + a0) = 0 in unknowns (a1, a0, b1, b0)
      rows.push_back({-t, -1.0, v.real() * t, v.real()});
    } catch (const SingularityError&) {
    }
  }
  if (rows.size() < 5) return std::nullopt;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < 4; ++c) A(static_cast<Eigen::Index>(r), c) = rows[r][c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(3) < 1e-10 * sv(0)) || !(sv(2) > 1e-6 * sv(0))) return std::nullopt;
  Eigen::Vector4d v = svd.matrixV().col(3);
  Eigen::Index big = 0;
  v.cwiseAbs().maxCoeff(&big);
  v /= v(big);
  std::array<Rational, 4> q;
  for (int c = 0; c < 4; ++c) {
    auto s = snap_rational(v(c), 64, 1e-9);
    if (!s) return std::nullopt;
    q[static_cast<std::size_t>(c)] = *s;
  }
  Rational det = q[0] * q[3] - q[1] * q[2];
  if (det == 0) return std::nullopt;
  if (det < 0) return std::nullopt;  // decreasing T
  return TimeMap::mobius(q[0], q[1], q[2], q[3], true);
}

inline std::optional<Rational> linear_coefficient(const Expr& arg) {
  // arg == k t with rational k
  const Expr k = arg.diff(Var::t);
  const auto c = k.constant_value();
  if (!c || !c->is_real()) return std::nullopt;
  if (arg != Expr(c->re) * Expr::t()) return std::nullopt;
  return c->re;
}

}  // namespace detail

/// Identifies T as one of the registered families, falling back to Custom.
inline TimeMap recognize_time_map(const Expr& T, std::optional<Interval> domain = std::nullopt) {
  if (T.depends_on(Var::x)) throw std::invalid_argument("T must not depend on x");
  TimeMap out;
  bool found = false;
  const Expr Tt = T.diff(Var::t);
  if (auto a = Tt.constant_value(); a && a->is_real() && a->re > 0) {
    out = TimeMap::affine(a->re, T.constant_term().re);
    found = true;
  }
  if (!found && T.kind() == NodeKind::Tan) {
    if (auto k = detail::linear_coefficient(T.children().front()); k && *k > 0) {
      out = TimeMap::tan_map(*k);
      found = true;
    }
  }
  if (!found) {
    const CRational d = T.constant_term();
    const Expr rest = T - Expr(d);
    if (d.is_real() && rest.term_count() == 1) {
      // c * exp(k t)
      const Expr ratio = rest.diff(Var::t) / rest;
      if (auto k = ratio.constant_value(); k && k->is_real() && k->re != 0) {
        const Expr c = rest * exp(Expr(-k->re) * Expr::t());
        if (auto cv = c.constant_value(); cv && cv->is_real() && cv->re * k->re > 0) {
          out = TimeMap::exponential(cv->re, k->re, d.re);
          found = true;
        }
      }
    }
  }
  if (!found) {
    if (auto mob = detail::recognize_mobius(T)) {
      if (mob->T - T == Expr(0) || is_zero(mob->T - T, make_plan({})).zero()) {
        out = *mob;
        found = true;
      }
    }
  }
  if (!found) return TimeMap::custom(T, domain.value_or(Interval{-kInf, kInf}));
  if (domain) {
    if (out.family == TimeFamily::Mobius) {
      const double pole = -to_double(out.params[3] / out.params[2]);
      const bool upper = domain->lo >= pole;
      out = TimeMap::mobius(out.params[0], out.params[1], out.params[2], out.params[3], upper);
    }
    out.domain = detail::intersect(out.domain, *domain);
  }
  return out;
}

inline nlohmann::json to_json(const Interval& iv) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  return nlohmann::json::array({num(iv.lo), num(iv.hi)});
}

inline Interval interval_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "+inf") return kInf;
      if (s == "-inf") return -kInf;
      try {
        return to_double(parse_exact_rational(s));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad interval endpoint '" + s + "'");
      }
    }
    return v.get<double>();
  };
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("domain must be [lo, hi]");
  return {num(j[0]), num(j[1])};
}

inline nlohmann::json to_json(const EquivMap& m) {
  nlohmann::json j;
  j["T"] = m.time.T.str();
  j["X"] = m.X.str();
  j["Psi"] = m.Psi.str();
  j["reflect_x"] = m.reflect_x;
  j["reflect_t"] = m.reflect_t;
  j["family"] = to_string(m.time.family);
  j["domain"] = to_json(m.time.domain);
  return j;
}

inline EquivMap equiv_map_from_json(const nlohmann::json& j, const Bindings& b = {}) {
  EquivMap m;
  std::optional<Interval> dom;
  if (j.contains("domain")) dom = interval_from_json(j.at("domain"));
  if (j.contains("T")) m.time = recognize_time_map(parse(j.at("T").get<std::string>(), b), dom);
  if (j.contains("X")) m.X = parse(j.at("X").get<std::string>(), b);
  if (j.contains("Psi")) m.Psi = parse(j.at("Psi").get<std::string>(), b);
  if (m.X.depends_on(Var::x) || m.Psi.depends_on(Var::x)) throw std::invalid_argument("X and Psi must be functions of t");
  m.reflect_x = j.value("reflect_x", false);
  m.reflect_t = j.value("reflect_t", false);
  return m;
}

// ---------------------------------------------------------------------------
// Infinitesimal generators

enum class GenKind { Dprime, Gprime, Mprime };

inline const char* to_string(GenKind k) {
  switch (k) {
    case GenKind::Dprime: return "Dprime";
    case GenKind::Gprime: return "Gprime";
    case GenKind::Mprime: return "Mprime";
  }
  return "?";
}

struct InfinitesimalGen {
  GenKind kind = GenKind::Mprime;
  Expr param = 1;
};

/// theta, the V-component of the generator. D'(xi) carries i (gh/4) xi_tt, the
/// coefficient consistent with the finite action and the classifying condition.
inline Expr infinitesimal_action(const InfinitesimalGen& g, const ModelParams& p, const Potential& V) {
  const Expr& f = g.param;
  switch (g.kind) {
    case GenKind::Dprime: {
      const Expr ft = f.diff(Var::t), ftt = ft.diff(Var::t);
      const Expr x = Expr::x();
      return constant(1, 8) * ftt.diff(Var::t) * x * x + Expr::i() * Expr(p.gamma_hat / 4) * ftt - ft * V.v;
    }
    case GenKind::Gprime: return constant(1, 2) * f.diff(Var::t).diff(Var::t) * Expr::x();
    case GenKind::Mprime: return f.diff(Var::t);
  }
  return 0;
}

/// D'(xi) with the coefficient i/gamma on xi_tt, as printed in the generator list.
inline Expr infinitesimal_action_theorem_literal(const InfinitesimalGen& g, const ModelParams& p, const Potential& V) {
  if (g.kind != GenKind::Dprime) return infinitesimal_action(g, p, V);
  const Expr ft = g.param.diff(Var::t), ftt = ft.diff(Var::t);
  const Expr x = Expr::x();
  return constant(1, 8) * ftt.diff(Var::t) * x * x + Expr::i() * Expr(1 / p.gamma) * ftt - ft * V.v;
}

/// One-parameter finite family through the identity with the generator's direction.
inline EquivMap finite_family(const InfinitesimalGen& g, const Rational& eps) {
  EquivMap m;
  const Expr e(eps);
  switch (g.kind) {
    case GenKind::Dprime: m.time = TimeMap::custom(Expr::t() + e * g.param); break;
    case GenKind::Gprime: m.X = e * g.param; break;
    case GenKind::Mprime: m.Psi = e * g.param; break;
  }
  return m;
}

struct ConsistencyReport {
  std::vector<double> eps;
  std::vector<double> remainder;  // max |V~_eps - V - eps theta| over plan points (old variables)
  double slope = 0.0;             // log-log slope of remainder against eps
  bool exact = false;             // remainder below 1e-13 at every eps
};

/// Second-order check: the finite family agrees with eps*theta up to O(eps^2).
inline ConsistencyReport finite_infinitesimal_consistency(const InfinitesimalGen& g, const ModelParams& p,
                                                          const Potential& V, const std::vector<Rational>& eps_list,
                                                          const SamplePlan& plan,
                                                          const std::function<Expr(const InfinitesimalGen&, const ModelParams&, const Potential&)>& theta_fn =
                                                              infinitesimal_action) {
  ConsistencyReport rep;
  const Expr theta = theta_fn(g, p, V);
  for (const auto& e : eps_list) {
    const EquivMap m = finite_family(g, e);
    const Expr diff = detail::transformed_in_old_variables(m, p, V.v) - V.v - Expr(e) * theta;
    double worst = 0.0;
    for (std::size_t k = 0; k < plan.size(); ++k) {
      try {
        const auto tt = m.time.T.diff(Var::t).eval(plan.t_samples[k]);
        if (!(tt.real() > 0)) throw DomainViolation("eps too large: T_t <= 0 on the plan");
        worst = std::max(worst, std::abs(diff.eval(plan.t_samples[k], plan.x_samples[k])));
      } catch (const SingularityError&) {
      }
    }
    rep.eps.push_back(to_double(e));
    rep.remainder.push_back(worst);
  }
  rep.exact = true;
  for (double r : rep.remainder)
    if (r >= 1e-13) rep.exact = false;
  // least squares slope of log r against log eps
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < rep.eps.size(); ++k) {
    if (!(rep.remainder[k] > 0)) continue;
    const double lx = std::log(rep.eps[k]), ly = std::log(rep.remainder[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n >= 2) rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

}  // namespace nlsgc
