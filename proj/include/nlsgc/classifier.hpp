#pragma once

#include "nlsgc/equiv.hpp"
#include "nlsgc/invariance.hpp"
#include "nlsgc/sampling.hpp"
#include "nlsgc/tables.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsgc {

/// V lies outside the template grammar; subterm names the offending part.
struct TemplateRejection : std::invalid_argument {
  std::string subterm;
  TemplateRejection(const std::string& what, std::string sub) : std::invalid_argument(what), subterm(std::move(sub)) {}
};

struct ClassifyOptions {
  PlanOptions plan{};
  /// Treat t-free potentials outside the Laurent grammar as generic V(x)
  /// (cases 2.0 / 3.0) instead of rejecting them.
  bool declared_general = false;
};

struct ClassificationResult {
  std::string case_id;
  std::map<std::string, Rational> bindings;
  std::optional<EquivMap> canon;
  std::optional<std::string> canon_target;
  std::map<std::string, Rational> canon_bindings;
  std::string canon_potential;
  Grade grade = Grade::Proved;
  std::optional<ZeroTest> canon_test;
  std::vector<std::string> notes;
};

namespace detail {

/// q^{1/n} when it is rational.
inline std::optional<Rational> exact_root(const Rational& q, int n) {
  if (q < 0) return std::nullopt;
  if (q == 0) return Rational(0);
  auto int_root = [n](const Integer& v) -> std::optional<Integer> {
    const double est = std::pow(v.convert_to<double>(), 1.0 / n);
    for (long d = -1; d <= 1; ++d) {
      const auto r = static_cast<long long>(std::llround(est)) + d;
      if (r < 0) continue;
      Integer c = 1;
      for (int k = 0; k < n; ++k) c *= Integer(r);
      if (c == v) return Integer(r);
    }
    return std::nullopt;
  };
  const auto num = int_root(boost::multiprecision::numerator(q));
  const auto den = int_root(boost::multiprecision::denominator(q));
  if (!num || !den) return std::nullopt;
  return Rational(*num, *den);
}

inline Rational sign_of(const Rational& q) { return q > 0 ? Rational(1) : q < 0 ? Rational(-1) : Rational(0); }

/// A sample point of plan where every expression evaluates finitely.
inline std::optional<std::pair<double, double>> probe_point(const SamplePlan& plan, const std::vector<Expr>& exprs,
                                                            std::size_t skip = 0) {
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const double t = plan.t_samples[k], x = plan.x_samples[k];
    bool ok = true;
    try {
      for (const auto& e : exprs)
        if (!std::isfinite(std::abs(e.eval(t, x)))) ok = false;
    } catch (const SingularityError&) {
      ok = false;
    }
    if (!ok) continue;
    if (skip-- == 0) return std::make_pair(t, x);
  }
  return std::nullopt;
}

inline SamplePlan plan_for(const PlanOptions& opt, const EquivMap& m, const std::vector<Expr>& exprs) {
  PlanOptions po = opt;
  po.t_range = {std::max(opt.t_range.lo, m.time.image.lo), std::min(opt.t_range.hi, m.time.image.hi)};
  if (!(po.t_range.lo < po.t_range.hi)) po.t_range = opt.t_range;
  return make_plan(po, exprs);
}

inline std::optional<Rational> snap_exact(double v) {
  if (auto r = snap_rational(v, 100000, 1e-9 * std::max(1.0, std::abs(v)))) return r;
  return std::nullopt;
}

/// Antiderivative in t of sums of c t^n, c (l t + m)^{-1}, c exp(k t + m),
/// c sin(k t + m), c cos(k t + m); nullopt otherwise.
inline std::optional<Expr> antiderivative_t(const Expr& e) {
  Expr out;
  const Expr t = Expr::t();
  for (const Expr& term : e.terms()) {
    if (!term.depends_on(Var::t)) {
      out += term * t;
      continue;
    }
    // split off the constant coefficient
    CRational coeff(1);
    Expr rest = term;
    if (term.kind() == NodeKind::Prod) {
      const auto ch = term.children();
      if (ch.size() == 2 && ch.front().is_constant()) {
        coeff = *ch.front().constant_value();
        rest = ch.back();
      }
    }
    std::optional<Expr> F;
    const NodeKind k = rest.kind();
    if (k == NodeKind::Var) {
      F = constant(1, 2) * t * t;
    } else if (k == NodeKind::Pow) {
      const auto ch = rest.children();
      const auto n = ch[1].constant_value();
      const Expr slope = ch[0].diff(Var::t);
      if (n && n->is_real() && slope.is_constant() && !slope.is_zero()) {
        if (n->re == -1) F = constant(1, 2) * log(ch[0] * ch[0]) / slope;
        else F = ch[0].pow(n->re + 1) / (Expr(n->re + 1) * slope);
      }
    } else if (k == NodeKind::Exp || k == NodeKind::Sin || k == NodeKind::Cos) {
      const Expr arg = rest.children().front();
      const Expr slope = arg.diff(Var::t);
      if (slope.is_constant() && !slope.is_zero()) {
        if (k == NodeKind::Exp) F = rest / slope;
        else if (k == NodeKind::Sin) F = -cos(arg) / slope;
        else F = sin(arg) / slope;
      }
    }
    if (!F || F->diff(Var::t) != rest) return std::nullopt;
    out += Expr(coeff) * *F;
  }
  return out;
}

/// Running normal-form reduction: the current potential and the composite map
/// that produced it from the input.
struct Pipeline {
  ModelParams p;
  Potential input;
  Potential current;
  EquivMap total;
  bool symbolic = true;
  std::vector<std::string>* notes = nullptr;

  void apply(const EquivMap& m) {
    current = apply_to_potential(m, p, current);
    if (!symbolic) return;
    try {
      total = compose(m, total);
    } catch (const std::exception& e) {
      symbolic = false;
      if (notes) notes->push_back(std::string("canonical map not composable: ") + e.what());
    }
  }
  void gauge(const Expr& Psi) {
    EquivMap g;
    g.Psi = Psi;
    apply(g);
  }
  void scale(const Rational& a) {
    EquivMap s;
    s.time = TimeMap::affine(a, 0);
    apply(s);
  }
  void reflect_t() { apply(EquivMap::It()); }
  void reflect_x() { apply(EquivMap::Ix()); }
};

/// Value of the single parameter `name` that makes tmpl(name) match v, read at a
/// probe point (tmpl is affine in the parameter) and snapped to a rational.
inline std::optional<Rational> fit_parameter(const std::string& tmpl, const std::string& name, const ModelParams& p,
                                             const Expr& v, const PlanOptions& opt) {
  Bindings b0 = make_bindings(p), b1 = make_bindings(p);
  b0[name] = Expr(0);
  b1[name] = Expr(1);
  const Expr f0 = parse(tmpl, b0), f1 = parse(tmpl, b1);
  const SamplePlan plan = make_plan(opt, {v, f0, f1});
  for (std::size_t skip = 0; skip < 8; ++skip) {
    const auto pt = probe_point(plan, {v, f0, f1}, skip);
    if (!pt) return std::nullopt;
    const auto d = f1.eval(pt->first, pt->second) - f0.eval(pt->first, pt->second);
    if (std::abs(d) < 1e-6) continue;
    const auto val = (v.eval(pt->first, pt->second) - f0.eval(pt->first, pt->second)) / d;
    if (std::abs(val.imag()) > 1e-8 * std::max(1.0, std::abs(val))) return std::nullopt;
    return snap_exact(val.real());
  }
  return std::nullopt;
}

}  // namespace detail

/// Attaches the Remark map of case_id (if any) and the final canonical check:
/// apply_to_potential(canon, V) against the Table-1 template.
inline void finish_with_canon(ClassificationResult& r, detail::Pipeline& pl, const ClassifyOptions& opt) {
  const ModelParams& p = pl.p;
  const ClassCase& c = find_case(r.case_id, p);
  Bindings cb = make_bindings(p);
  for (const auto& [k, v] : r.bindings) cb[k] = Expr(v);
  for (const auto& name : c.params)
    if (name == "U" || name == "W" || name == "Vtx") cb[name] = pl.current.v;  // generic rows

  // the reduced potential must be the case template at the bindings
  {
    const Expr tmpl = c.potential(p, cb).v;
    const auto z = is_zero(pl.current.v - tmpl, detail::plan_for(opt.plan, pl.total, {pl.current.v, tmpl}));
    if (!z.zero()) {
      r.notes.push_back("reduced potential " + pl.current.v.str() + " does not match template " + tmpl.str());
      r.grade = Grade::Probable;
      pl.symbolic = false;
    }
  }

  std::string target_id = r.case_id;
  std::map<std::string, Rational> tb;
  if (c.canon && c.n1_ref) {
    const EquivMap m = equiv_map_from_json(c.canon->map, cb);
    pl.apply(m);
    target_id = find_case(*c.n1_ref, p).id;
    for (const auto& [k, v] : c.canon->target_params) {
      if (k == "U" || k == "W" || k == "Vtx") continue;
      const auto val = parse(v, cb).constant_value();
      if (!val || !val->is_real()) {
        r.notes.push_back("target parameter " + k + " is not a rational constant");
        continue;
      }
      tb[k] = val->re;
    }
  } else if (r.case_id.rfind("1.", 0) == 0) {
    tb = r.bindings;
  }
  // tau brings the Case 1.3 parameter into [gh/4, inf)
  if (target_id == "1.3" && tb.count("nu") && tb["nu"] < p.gamma_hat / 4) {
    pl.apply(EquivMap::tau());
    tb["nu"] = p.gamma_hat / 2 - tb["nu"];
    r.notes.push_back("tau applied: nu -> gh/2 - nu");
  }
  const ClassCase& target = find_case(target_id, p);
  Bindings tbe;
  for (const auto& [k, v] : tb) tbe[k] = Expr(v);
  for (const auto& name : target.params)
    if (name == "U" || name == "W" || name == "Vtx") tbe[name] = pl.current.v;
  const Expr expected = target.potential(p, tbe).v;
  r.canon_target = target.id;
  r.canon_bindings = tb;
  r.canon_potential = expected.str();

  if (!pl.symbolic) {
    r.grade = Grade::Probable;
    return;
  }
  try {
    const Potential got = apply_to_potential(pl.total, p, pl.input);
    const SamplePlan plan = detail::plan_for(opt.plan, pl.total, {got.v, expected});
    const ZeroTest z = is_zero(got.v - expected, plan);
    r.canon_test = z;
    if (z.zero()) {
      r.canon = pl.total;
      if (z.grade() != Grade::Proved) r.grade = Grade::Probable;
    } else {
      r.notes.push_back("composite canonical map failed its zero-test, residual " + std::to_string(z.max_residual));
      r.grade = Grade::Probable;
    }
  } catch (const std::exception& e) {
    r.notes.push_back(std::string("canonical map not checkable: ") + e.what());
    r.grade = Grade::Probable;
  }
}

// ---------------------------------------------------------------------------
// Time-dependent branch

struct XiFit {
  std::size_t k = 0;                   // dimension of admissible xi = a t^2 + b t + c
  std::optional<std::array<Rational, 3>> abc;  // when k == 1, normalized and exact
  double gap = 0.0;
};

/// Solves (xi W)_t = (gh/4) xi_tt for quadratic xi, i.e.
/// a(t^2 W - gh t/2) + b(t W - gh/4) + c W - C = 0, on sampled t.
inline XiFit fit_xi(const ModelParams& p, const Expr& W, const PlanOptions& opt) {
  const SamplePlan plan = make_plan(opt, {W});
  const double g = to_double(p.gamma_hat);
  std::vector<std::array<double, 4>> rows;
  for (std::size_t s = 0; s < plan.size() && rows.size() < 60; ++s) {
    const double t = plan.t_samples[s];
    double w;
    try {
      w = W.eval(t).real();
    } catch (const SingularityError&) {
      continue;
    }
    if (!std::isfinite(w)) continue;
    rows.push_back({t * t * w - g * t / 2, t * w - g / 4, w, -1.0});
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < 4; ++c) A(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  Eigen::Vector4d norms;
  for (int c = 0; c < 4; ++c) norms(c) = A.col(c).norm();
  const double big = norms.maxCoeff();
  for (int c = 0; c < 4; ++c) {
    // a column that vanishes up to rounding is zero; rescaling it would promote noise
    if (norms(c) <= 1e-12 * big) {
      A.col(c).setZero();
      norms(c) = 1.0;
    }
    A.col(c) /= norms(c);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-9 * sv(0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  XiFit f;
  f.k = static_cast<std::size_t>(4 - rank);
  if (rank > 0 && rank < 4) f.gap = sv(rank - 1) / std::max(sv(rank), 1e-300);
  if (f.k == 1) {
    Eigen::Vector4d v = svd.matrixV().col(3).cwiseQuotient(norms);
    int lead = std::abs(v(0)) > 1e-9 * v.cwiseAbs().maxCoeff() ? 0 : std::abs(v(1)) > 1e-9 * v.cwiseAbs().maxCoeff() ? 1 : 2;
    v /= v(lead);
    std::array<Rational, 3> abc;
    bool ok = true;
    for (int c = 0; c < 3; ++c) {
      if (std::abs(v(c)) < 1e-10) {
        abc[static_cast<std::size_t>(c)] = 0;
        continue;
      }
      auto q = detail::snap_exact(v(c));
      if (!q) ok = false;
      else abc[static_cast<std::size_t>(c)] = *q;
    }
    if (ok) f.abc = abc;
  }
  return f;
}

inline ClassificationResult classify_timedep(const ModelParams& p, const Potential& Vt,
                                             const ClassifyOptions& opt = {}) {
  if (Vt.v.depends_on(Var::x)) throw TemplateRejection("classify_timedep needs an x-free potential", Vt.v.str());
  ClassificationResult r;
  detail::Pipeline pl{p, Vt, Vt, EquivMap::identity(), true, &r.notes};
  const SamplePlan plan = make_plan(opt.plan, {Vt.v});

  // gauge away Re V with Psi_t = -Re V
  const Expr re = Vt.v.real_part();
  if (!re.is_zero() && !is_zero(re, plan).zero()) {
    if (auto Psi = detail::antiderivative_t(-re)) {
      pl.gauge(*Psi);
      r.notes.push_back("gauge Psi = " + Psi->str() + " removes Re V");
    } else {
      r.notes.push_back("Re V has no closed-form antiderivative in the kernel; canonical map omitted");
      pl.symbolic = false;
      pl.current = Potential(Expr::i() * Vt.v.imag_part());
    }
  }
  const Expr W = pl.current.v.imag_part();
  const XiFit fit = fit_xi(p, W, opt.plan);
  const bool crit = p.critical();

  auto constant_branch = [&]() {
    // current is i W0 with W0 constant and nonzero
    const auto w0 = detail::fit_parameter("i*nu", "nu", p, pl.current.v, opt.plan);
    if (!w0 || *w0 == 0) {
      r.notes.push_back("could not read the constant W");
      r.grade = Grade::Probable;
      r.case_id = "1.4";
      return;
    }
    if (*w0 < 0) pl.reflect_t();
    pl.scale(abs(*w0));
    r.case_id = "1.4";
  };
  auto nu_branch = [&](const char* id, const char* tmpl) {
    const auto nu = detail::fit_parameter(tmpl, "nu", p, pl.current.v, opt.plan);
    r.case_id = id;
    if (!nu) {
      r.notes.push_back("parameter nu is not rational");
      r.grade = Grade::Probable;
      pl.symbolic = false;
      return;
    }
    r.bindings["nu"] = *nu;
  };

  if (fit.k == 0) {
    r.case_id = "1.1";
    r.notes.push_back("no special form of W matches");
  } else if (fit.k >= 2) {
    r.case_id = crit ? "1.5b" : "1.5a";
    if (!is_zero(W, plan).zero()) {
      // W = gh / (2 (t - t0)) is the tau-image of 0
      const auto pt = detail::probe_point(plan, {W});
      const double t = pt->first;
      const auto t0 = detail::snap_exact(t - to_double(p.gamma_hat) / (2 * W.eval(t).real()));
      if (!t0) {
        r.notes.push_back("pole of W is not rational");
        pl.symbolic = false;
        r.grade = Grade::Probable;
      } else {
        if (*t0 != 0) {
          EquivMap tr;
          tr.time = TimeMap::affine(1, -*t0);
          pl.apply(tr);
        }
        pl.apply(EquivMap::tau());
      }
    }
  } else if (!fit.abc) {
    r.notes.push_back("admissible xi has irrational coefficients");
    r.grade = Grade::Probable;
    pl.symbolic = false;
    r.case_id = "1.1";
  } else {
    auto [a, b, c] = *fit.abc;
    if (a == 0 && b == 0) {
      constant_branch();
    } else if (a == 0) {
      const Rational t0 = -c / b;
      if (t0 != 0) {
        EquivMap tr;
        tr.time = TimeMap::affine(1, -t0);
        pl.apply(tr);
      }
      nu_branch("1.3", "i*nu/t");
    } else {
      b /= a;
      c /= a;
      const Rational disc = b * b - 4 * c;
      const Rational tc = -b / 2;
      if (disc < 0) {
        const auto w = detail::exact_root(c - b * b / 4, 2);
        if (!w) {
          r.case_id = "1.2";
          r.notes.push_back("normalizing scale sqrt(" + to_string(c - b * b / 4) + ") is irrational");
          r.grade = Grade::Probable;
          pl.symbolic = false;
        } else {
          EquivMap tr;
          tr.time = TimeMap::affine(1 / *w, -tc / *w);
          pl.apply(tr);
          nu_branch("1.2", "i/2*(gh*t+nu)/(t^2+1)");
          if (r.bindings.count("nu") && r.bindings["nu"] < 0) {
            pl.reflect_t();
            r.bindings["nu"] = -r.bindings["nu"];
          }
        }
      } else if (disc == 0) {
        EquivMap mb;
        mb.time = TimeMap::mobius(0, -1, 1, -tc, true);
        pl.apply(mb);
        constant_branch();
      } else {
        const auto s = detail::exact_root(disc, 2);
        if (!s) {
          r.case_id = "1.3";
          r.notes.push_back("roots of xi are irrational");
          r.grade = Grade::Probable;
          pl.symbolic = false;
        } else {
          const Rational t1 = (-b - *s) / 2, t2 = (-b + *s) / 2;
          EquivMap mb;
          mb.time = TimeMap::mobius(1, -t1, -1, t2, false);
          pl.apply(mb);
          nu_branch("1.3", "i*nu/t");
        }
      }
    }
  }

  if (r.case_id == "1.1") {
    // canonical form is i W itself; only the gauge acts
    r.canon_target = "1.1";
    r.canon_potential = pl.current.v.str();
    if (pl.symbolic) r.canon = pl.total;
    return r;
  }
  finish_with_canon(r, pl, opt);
  return r;
}

// ---------------------------------------------------------------------------
// Stationary branch

namespace detail {

/// Rewrites V so that a negative power of a linear x-base (x - x0) becomes a
/// power of x; returns x0.
inline std::optional<Rational> laurent_center(const Expr& v) {
  std::optional<Rational> found;
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    const NodeKind k = e.kind();
    if (k == NodeKind::Pow) {
      const auto ch = e.children();
      const Expr& base = ch[0];
      const Expr slope = base.diff(Var::x);
      if (base.depends_on(Var::x) && !base.depends_on(Var::t) && slope.is_constant() && base.term_count() > 1) {
        const auto s = slope.constant_value();
        const auto b0 = (base - slope * Expr::x()).constant_value();
        if (s && b0 && s->is_real() && b0->is_real() && s->re != 0) found = -b0->re / s->re;
      }
      walk(ch[0]);
      return;
    }
    if (k == NodeKind::Sum || k == NodeKind::Prod)
      for (const auto& c : e.children()) walk(c);
  };
  walk(v);
  return found;
}

}  // namespace detail

inline ClassificationResult classify_timedep(const ModelParams& p, const Potential& Vt, const ClassifyOptions& opt);

inline ClassificationResult classify_stationary(const ModelParams& p, const Potential& Vx,
                                                const ClassifyOptions& opt = {}) {
  if (Vx.v.depends_on(Var::t)) throw TemplateRejection("classify_stationary needs a t-free potential", Vx.v.str());
  if (!Vx.v.depends_on(Var::x)) return classify_timedep(p, Vx, opt);
  ClassificationResult r;
  detail::Pipeline pl{p, Vx, Vx, EquivMap::identity(), true, &r.notes};
  const bool crit = p.critical();
  const Rational gh = p.gamma_hat;

  auto generic = [&](const std::string& why) {
    r.case_id = crit ? "3.0" : "2.0";
    r.bindings.clear();
    r.notes.push_back(why);
    pl = detail::Pipeline{p, Vx, Vx, EquivMap::identity(), true, &r.notes};
    finish_with_canon(r, pl, opt);
    return r;
  };

  std::map<long, Expr> parts;
  try {
    parts = x_laurent_decompose(Vx.v);
  } catch (const NotLaurentInX& e) {
    const auto x0 = detail::laurent_center(Vx.v);
    bool ok = false;
    if (x0) {
      EquivMap tr;
      tr.X = Expr(-*x0);
      const Potential moved = apply_to_potential(tr, p, Vx);
      try {
        parts = x_laurent_decompose(moved.v);
        pl.apply(tr);
        r.notes.push_back("re-centered x by " + to_string(*x0));
        ok = true;
      } catch (const NotLaurentInX&) {
      }
    }
    if (!ok) {
      if (opt.declared_general) return generic("declared general V(x)");
      throw TemplateRejection(std::string("potential is not a Laurent polynomial in x: ") + e.what(), Vx.v.str());
    }
  }

  std::map<long, CRational> d;
  for (const auto& [k, c] : parts) {
    const auto cv = c.constant_value();
    const bool allowed = k == -2 || k == 0 || k == 1 || k == 2;
    if (!cv || !allowed) {
      const std::string sub = (c * Expr::x().pow(static_cast<int>(k))).str();
      if (opt.declared_general) return generic("declared general V(x)");
      throw TemplateRejection("x-power " + std::to_string(k) + " outside {-2,0,1,2}", sub);
    }
    d[k] = *cv;
  }
  const CRational e = d.count(-2) ? d[-2] : CRational(0);
  CRational d2 = d.count(2) ? d[2] : CRational(0);
  CRational d1 = d.count(1) ? d[1] : CRational(0);
  CRational d0 = d.count(0) ? d[0] : CRational(0);

  if (!d2.is_real() || !d1.is_real()) return generic("complex x^2 or x coefficient admits no extension");

  auto gauge_real_constant = [&](const CRational& c0) {
    if (c0.re != 0) pl.gauge(Expr(-c0.re) * Expr::t());
  };
  auto set_ab = [&]() {
    const auto cur = x_laurent_decompose(pl.current.v);
    const auto ev = cur.count(-2) ? cur.at(-2).constant_value() : std::nullopt;
    if (ev) {
      r.bindings["alpha"] = ev->re;
      r.bindings["beta"] = ev->im;
    }
  };

  if (!e.is_zero()) {
    // K != 0: chi = 0, the x^2 coefficient fixes xi
    if (d1.re != 0) return generic("x^{-2} with a linear term admits no extension");
    gauge_real_constant(d0);
    const Rational nu = d0.im;
    if (d2.re == 0) {
      if (nu != 0) return generic("x^{-2} with nonzero constant i*nu admits no extension");
      if (e.im < 0) pl.reflect_t();
      r.case_id = crit ? "3.1" : "2.1";
      set_ab();
    } else if (d2.re > 0) {
      if (crit ? nu != 0 : nu * nu != gh * gh * d2.re) return generic("x^2 + i*nu + e x^{-2} off the extension relation");
      const auto s = detail::exact_root(d2.re, 2);
      r.case_id = crit ? "3.2" : "2.2";
      if (crit ? e.im < 0 : detail::sign_of(nu) != detail::sign_of(gh)) pl.reflect_t();
      if (!s) {
        r.notes.push_back("scale sqrt(" + to_string(d2.re) + ") is irrational; canonical map omitted");
        r.grade = Grade::Probable;
        return r;
      }
      pl.scale(*s);
      set_ab();
    } else {
      if (!crit || nu != 0) return generic("-x^2 + i*nu + e x^{-2} admits no extension unless gamma = 4, nu = 0");
      const auto s = detail::exact_root(-d2.re, 2);
      r.case_id = "3.3";
      if (e.im < 0) pl.reflect_t();
      if (!s) {
        r.notes.push_back("scale sqrt(" + to_string(-d2.re) + ") is irrational; canonical map omitted");
        r.grade = Grade::Probable;
        return r;
      }
      pl.scale(*s);
      set_ab();
    }
    finish_with_canon(r, pl, opt);
    return r;
  }

  // K = 0: V = d2 x^2 + d1 x + d0
  if (d2.re != 0) {
    const Rational X = d1.re / (2 * d2.re);
    if (X != 0) {
      EquivMap tr;
      tr.X = Expr(X);
      pl.apply(tr);
      d0 = d0 - CRational(d1.re * d1.re / (4 * d2.re));
      r.notes.push_back("completed the square: X = " + to_string(X));
    }
    gauge_real_constant(d0);
    Rational nu = d0.im;
    const auto s = detail::exact_root(abs(d2.re), 2);
    if (d2.re > 0) {
      const bool special = crit ? nu == 0 : nu * nu == gh * gh * d2.re;
      if (special) {
        r.case_id = crit ? "3.10" : "2.9";
        if (!crit && detail::sign_of(nu) != detail::sign_of(gh)) pl.reflect_t();
      } else {
        r.case_id = crit ? "3.7" : "2.6";
        if (nu < 0) {
          pl.reflect_t();
          nu = -nu;
        }
      }
    } else {
      r.case_id = crit ? (nu == 0 ? "3.11" : "3.6") : "2.5";
      if (nu < 0) {
        pl.reflect_t();
        nu = -nu;
      }
    }
    if (!s) {
      r.notes.push_back("scale sqrt(" + to_string(abs(d2.re)) + ") is irrational; canonical map omitted");
      r.grade = Grade::Probable;
      return r;
    }
    pl.scale(*s);
    const bool has_nu = r.case_id == "2.6" || r.case_id == "3.7" || r.case_id == "2.5" || r.case_id == "3.6";
    if (has_nu) r.bindings["nu"] = nu / *s;
    finish_with_canon(r, pl, opt);
    return r;
  }

  // d2 = 0, d1 != 0
  gauge_real_constant(d0);
  Rational nu = d0.im;
  if (d1.re < 0) pl.reflect_x();
  if (nu < 0) {
    pl.reflect_t();
    nu = -nu;
  }
  r.case_id = crit ? (nu == 0 ? "3.9" : "3.5") : (nu == 0 ? "2.8" : "2.4");
  // |d1| a^{-3/2} = 1
  const auto q = detail::exact_root(abs(d1.re), 3);
  if (!q) {
    r.notes.push_back("scale |d1|^{2/3} is irrational; canonical map omitted");
    r.grade = Grade::Probable;
    return r;
  }
  const Rational a = *q * *q;
  pl.scale(a);
  if (nu != 0) r.bindings["nu"] = nu / a;
  finish_with_canon(r, pl, opt);
  return r;
}

/// Routes V to the time-dependent or stationary branch. Mixed dependence is
/// reported as the generic Case 1.0.
inline ClassificationResult classify(const ModelParams& p, const Potential& V, const ClassifyOptions& opt = {}) {
  const bool dt = V.v.depends_on(Var::t), dx = V.v.depends_on(Var::x);
  if (dt && dx) {
    ClassificationResult r;
    r.case_id = "1.0";
    r.grade = Grade::Probable;
    r.notes.push_back("V depends on both t and x; reduction to V_t V_x = 0 is not attempted");
    return r;
  }
  if (dx) return classify_stationary(p, V, opt);
  return classify_timedep(p, V, opt);
}

/// Options for classifying an instance of c: a row whose template is the free
/// placeholder U(x) is a declared general template.
inline ClassifyOptions options_for(const ClassCase& c, const PlanOptions& plan = {}) {
  ClassifyOptions opt;
  opt.plan = plan;
  opt.declared_general = std::find(c.params.begin(), c.params.end(), "U") != c.params.end();
  return opt;
}

/// True when `got` names c itself or a case linked to it through the N1 column.
inline bool same_or_canonical(const std::string& got, const ClassCase& c, const ModelParams& p) {
  if (got == c.id) return true;
  const ClassCase& g = find_case(got, p);
  if (g.n1_ref && find_case(*g.n1_ref, p).id == c.id) return true;
  if (c.n1_ref && find_case(*c.n1_ref, p).id == g.id) return true;
  return false;
}

inline nlohmann::json to_json(const ClassificationResult& r) {
  nlohmann::json j;
  j["case"] = r.case_id;
  nlohmann::json b = nlohmann::json::object();
  for (const auto& [k, v] : r.bindings) b[k] = to_string(v);
  j["bindings"] = b;
  j["grade"] = to_string(r.grade);
  if (r.canon) j["canon"] = to_json(*r.canon);
  else j["canon"] = nullptr;
  if (r.canon_target) {
    nlohmann::json tb = nlohmann::json::object();
    for (const auto& [k, v] : r.canon_bindings) tb[k] = to_string(v);
    j["canon_target"] = {{"case", *r.canon_target}, {"bindings", tb}, {"potential", r.canon_potential}};
  }
  if (r.canon_test) j["canon_test"] = to_json(*r.canon_test);
  j["notes"] = r.notes;
  return j;
}

}  // namespace nlsgc
