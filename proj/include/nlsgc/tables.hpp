#pragma once

#include "nlsgc/catalog_data.hpp"
#include "nlsgc/equiv.hpp"
#include "nlsgc/invariance.hpp"
#include "nlsgc/liealg.hpp"
#include "nlsgc/sampling.hpp"

#include <json.hpp>

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsgc {

struct ConstraintViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownCase : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// lhs op rhs over exact rationals; ops: eq ne lt le gt ge, and nonzero_pair
/// meaning (lhs, rhs) != (0, 0).
struct Constraint {
  std::string op;
  std::string lhs;
  std::string rhs;

  std::string str() const {
    if (op == "nonzero_pair") return "(" + lhs + "," + rhs + ") != (0,0)";
    static const std::map<std::string, std::string> sym{{"eq", "=="}, {"ne", "!="}, {"lt", "<"},
                                                         {"le", "<="}, {"gt", ">"},  {"ge", ">="}};
    auto it = sym.find(op);
    return lhs + " " + (it == sym.end() ? op : it->second) + " " + rhs;
  }
};

struct CanonSpec {
  nlohmann::json map = nlohmann::json::object();
  std::map<std::string, std::string> target_params;
};

enum class Regime { Any, NotCritical, Critical };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Any: return "any";
    case Regime::NotCritical: return "ne4";
    case Regime::Critical: return "eq4";
  }
  return "?";
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "any") return Regime::Any;
  if (s == "ne4") return Regime::NotCritical;
  if (s == "eq4") return Regime::Critical;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

inline bool regime_applies(Regime r, const ModelParams& p) {
  return r == Regime::Any || (r == Regime::Critical) == p.critical();
}

struct ClassCase {
  std::string id;
  int table = 1;
  Regime regime = Regime::Any;
  std::string potential_template;
  std::vector<std::string> params;
  std::vector<Constraint> constraints;
  std::vector<std::string> basis;
  std::optional<std::string> n1_ref;
  std::optional<CanonSpec> canon;
  std::string ansatz = "rich";

  bool applies(const ModelParams& p) const { return regime_applies(regime, p); }

  Potential potential(const ModelParams& p, const Bindings& b) const {
    return Potential(parse(potential_template, with_model(p, b)));
  }

  std::vector<VectorField> fields(const ModelParams& p, const Bindings& b) const {
    std::vector<VectorField> out;
    const Bindings all = with_model(p, b);
    for (const auto& f : basis) out.push_back(parse_field(f, all));
    return out;
  }

  AnsatzSpace ansatz_space(const ModelParams& p, const Bindings& b) const {
    if (ansatz == "rich") return AnsatzSpace::rich();
    return AnsatzSpace::parse_spec(ansatz, with_model(p, b));
  }

  static Bindings with_model(const ModelParams& p, const Bindings& b) {
    Bindings all = make_bindings(p);
    for (const auto& [k, v] : b) all[k] = v;
    return all;
  }
};

namespace detail {

inline Rational constraint_value(const std::string& text, const Bindings& b, const std::string& what) {
  const Expr e = parse(text, b);
  const auto c = e.constant_value();
  if (!c || !c->is_real()) throw ConstraintViolation(what + ": '" + text + "' is not a real constant");
  return c->re;
}

}  // namespace detail

/// Throws ConstraintViolation when b (with gh from p) violates a constraint of c
/// or c does not apply to p.
inline void check_constraints(const ClassCase& c, const ModelParams& p, const Bindings& b) {
  if (!c.applies(p))
    throw ConstraintViolation("case " + c.id + " requires gamma regime " + to_string(c.regime) + ", got gamma = " +
                              to_string(p.gamma));
  for (const auto& name : c.params)
    if (!b.count(name)) throw ConstraintViolation("case " + c.id + " needs a binding for '" + name + "'");
  const Bindings all = ClassCase::with_model(p, b);
  for (const auto& k : c.constraints) {
    const std::string what = "case " + c.id + " constraint " + k.str();
    const Rational l = detail::constraint_value(k.lhs, all, what);
    const Rational r = detail::constraint_value(k.rhs, all, what);
    bool ok = true;
    if (k.op == "eq") ok = l == r;
    else if (k.op == "ne") ok = l != r;
    else if (k.op == "lt") ok = l < r;
    else if (k.op == "le") ok = l <= r;
    else if (k.op == "gt") ok = l > r;
    else if (k.op == "ge") ok = l >= r;
    else if (k.op == "nonzero_pair") ok = !(l == 0 && r == 0);
    else throw std::invalid_argument("unknown constraint op '" + k.op + "'");
    if (!ok) throw ConstraintViolation(what + " violated (" + to_string(l) + ", " + to_string(r) + ")");
  }
}

inline bool satisfies_constraints(const ClassCase& c, const ModelParams& p, const Bindings& b) {
  try {
    check_constraints(c, p, b);
    return true;
  } catch (const ConstraintViolation&) {
    return false;
  }
}

inline const nlohmann::json& catalog_json() {
  static const nlohmann::json j = nlohmann::json::parse(data::kCatalogJson);
  return j;
}

inline ClassCase case_from_json(const nlohmann::json& j) {
  ClassCase c;
  c.id = j.at("id").get<std::string>();
  c.table = j.value("table", 1);
  c.regime = regime_from_string(j.value("regime", "any"));
  c.potential_template = j.at("template").get<std::string>();
  c.params = j.value("params", std::vector<std::string>{});
  for (const auto& k : j.value("constraints", nlohmann::json::array()))
    c.constraints.push_back({k.at("op").get<std::string>(), k.at("lhs").get<std::string>(), k.at("rhs").get<std::string>()});
  c.basis = j.at("basis").get<std::vector<std::string>>();
  if (j.contains("n1")) c.n1_ref = j.at("n1").get<std::string>();
  if (j.contains("canon")) {
    CanonSpec s;
    s.map = j.at("canon").value("map", nlohmann::json::object());
    s.target_params = j.at("canon").value("target_params", std::map<std::string, std::string>{});
    c.canon = s;
  }
  c.ansatz = j.value("ansatz", std::string("rich"));
  return c;
}

inline nlohmann::json to_json(const ClassCase& c) {
  nlohmann::json j;
  j["id"] = c.id;
  j["table"] = c.table;
  j["regime"] = to_string(c.regime);
  j["template"] = c.potential_template;
  if (!c.params.empty()) j["params"] = c.params;
  if (!c.constraints.empty()) {
    j["constraints"] = nlohmann::json::array();
    for (const auto& k : c.constraints) j["constraints"].push_back({{"op", k.op}, {"lhs", k.lhs}, {"rhs", k.rhs}});
  }
  j["basis"] = c.basis;
  if (c.n1_ref) j["n1"] = *c.n1_ref;
  if (c.canon) j["canon"] = {{"map", c.canon->map}, {"target_params", c.canon->target_params}};
  j["ansatz"] = c.ansatz;
  return j;
}

inline const std::vector<ClassCase>& case_catalog() {
  static const std::vector<ClassCase> cases = [] {
    std::vector<ClassCase> out;
    for (const auto& j : catalog_json().at("cases")) out.push_back(case_from_json(j));
    return out;
  }();
  return cases;
}

/// Catalog entry by id. A bare "1.5" or "1.7" resolves to the variant for p.
inline const ClassCase& find_case(const std::string& id, std::optional<ModelParams> p = std::nullopt) {
  for (const auto& c : case_catalog())
    if (c.id == id) return c;
  for (const auto& c : case_catalog())
    if (c.id.size() == id.size() + 1 && c.id.compare(0, id.size(), id) == 0 && (!p || c.applies(*p))) return c;
  throw UnknownCase("no catalog case '" + id + "'");
}

/// Instance bindings of c at p drawn from the catalog grid, filtered by the
/// case constraints and deduplicated.
inline std::vector<Bindings> grid_instances(const ClassCase& c, const ModelParams& p) {
  if (!c.applies(p)) return {};
  const auto& grid = catalog_json().at("grid");
  const Bindings model = make_bindings(p);
  std::vector<Bindings> acc{Bindings{}};
  auto extend = [&](const std::vector<Bindings>& choices) {
    std::vector<Bindings> next;
    for (const auto& a : acc)
      for (const auto& ch : choices) {
        Bindings b = a;
        for (const auto& [k, v] : ch) b[k] = v;
        next.push_back(std::move(b));
      }
    acc = std::move(next);
  };
  std::set<std::string> names(c.params.begin(), c.params.end());
  if (names.count("nu")) {
    std::vector<Bindings> ch;
    for (const auto& v : grid.at("nu")) ch.push_back({{"nu", parse(v.get<std::string>(), model)}});
    extend(ch);
  }
  if (names.count("alpha") || names.count("beta")) {
    std::vector<Bindings> ch;
    for (const auto& ab : grid.at("alpha_beta"))
      ch.push_back({{"alpha", parse(ab[0].get<std::string>(), model)}, {"beta", parse(ab[1].get<std::string>(), model)}});
    extend(ch);
  }
  for (const char* fn : {"W", "U", "Vtx"}) {
    if (!names.count(fn)) continue;
    std::vector<Bindings> ch;
    for (const auto& v : grid.at(fn))
      if (regime_applies(regime_from_string(v.value("regime", "any")), p))
        ch.push_back({{fn, parse(v.at("value").get<std::string>(), model)}});
    extend(ch);
  }
  std::vector<Bindings> out;
  std::set<std::string> seen;
  for (auto& b : acc) {
    if (!satisfies_constraints(c, p, b)) continue;
    std::string key;
    for (const auto& [k, v] : b) key += k + "=" + v.str() + ";";
    if (seen.insert(key).second) out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<ModelParams> grid_gammas() {
  std::vector<ModelParams> out;
  for (const auto& g : catalog_json().at("grid").at("gamma")) out.emplace_back(parse_exact_rational(g.get<std::string>()));
  return out;
}

// ---------------------------------------------------------------------------
// Verification

struct OperatorCheck {
  std::string field;
  bool holds = false;
  ZeroTest test;
};

struct CanonCheck {
  std::string target;
  std::map<std::string, std::string> target_bindings;
  nlohmann::json map;
  std::string transformed;
  std::string expected;
  ZeroTest test;
  bool passed = false;
  std::string error;
};

struct DimensionCheck {
  std::size_t expected = 0;
  std::size_t found = 0;
  double gap = 0.0;
  bool verified = false;
  bool passed = false;
};

struct CaseReport {
  std::string id;
  Rational gamma{2};
  std::map<std::string, std::string> bindings;
  std::string potential;
  std::size_t points = 0;
  double max_residual = 0.0;  // worst operator residual
  std::vector<OperatorCheck> operators;
  bool closed = false;
  double closure_residual = 0.0;
  std::string closure_error;
  std::optional<CanonCheck> canon;
  std::optional<DimensionCheck> dimension;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

struct VerifyOptions {
  bool check_dimension = true;
  bool check_canon = true;
  double gap_threshold = 1e4;
};

inline std::map<std::string, std::string> binding_strings(const Bindings& b) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : b) out[k] = v.str();
  return out;
}

/// Plan restricted to the points that avoid the singularities of exprs.
inline SamplePlan restrict_plan(const SamplePlan& plan, const std::vector<Expr>& exprs) {
  SamplePlan out;
  out.tolerance = plan.tolerance;
  out.excluded = plan.excluded;
  for (const auto& e : exprs)
    for (const auto& s : singularities(e)) out.excluded.push_back(s);
  for (std::size_t k = 0; k < plan.size(); ++k) {
    if (out.excludes(plan.t_samples[k], plan.x_samples[k])) continue;
    out.t_samples.push_back(plan.t_samples[k]);
    out.x_samples.push_back(plan.x_samples[k]);
  }
  return out;
}

namespace detail {

inline CanonCheck check_canon(const ClassCase& c, const ModelParams& p, const Bindings& b, const Potential& V,
                              const PlanOptions& opt) {
  CanonCheck out;
  out.map = c.canon->map;
  const Bindings all = ClassCase::with_model(p, b);
  try {
    const ClassCase& target = find_case(*c.n1_ref, p);
    out.target = target.id;
    Bindings tb;
    for (const auto& [k, v] : c.canon->target_params) tb[k] = parse(v, all);
    out.target_bindings = binding_strings(tb);
    const Potential expected = target.potential(p, tb);
    const EquivMap m = equiv_map_from_json(c.canon->map, all);
    const Potential got = apply_to_potential(m, p, V);
    out.transformed = got.v.str();
    out.expected = expected.v.str();
    PlanOptions po = opt;
    const Interval img = m.time.image;
    po.t_range = {std::max(opt.t_range.lo, img.lo), std::min(opt.t_range.hi, img.hi)};
    const Expr diff = got.v - expected.v;
    const SamplePlan plan = make_plan(po, {got.v, expected.v});
    out.test = is_zero(diff, plan);
    out.passed = out.test.zero() && out.test.max_residual < opt.tolerance;
  } catch (const std::exception& e) {
    out.error = e.what();
    out.passed = false;
  }
  return out;
}

}  // namespace detail

/// Replays one catalog row at fixed bindings: every basis operator against the
/// classifying condition, closure, the canonical map and the solver dimension.
inline CaseReport verify_case(const ClassCase& c, const Bindings& b, const ModelParams& p, const PlanOptions& opt,
                              const VerifyOptions& vo = {}) {
  check_constraints(c, p, b);
  CaseReport rep;
  rep.id = c.id;
  rep.gamma = p.gamma;
  rep.bindings = binding_strings(b);
  const Potential V = c.potential(p, b);
  rep.potential = V.v.str();
  const auto fields = c.fields(p, b);
  std::vector<Expr> exprs{V.v};
  for (const auto& q : fields) {
    exprs.push_back(q.xi);
    exprs.push_back(q.chi);
    exprs.push_back(q.lam);
  }
  const SamplePlan plan = make_plan(opt, exprs);
  rep.points = plan.size();

  for (std::size_t k = 0; k < fields.size(); ++k) {
    const auto v = is_symmetry(p, V, fields[k], plan);
    OperatorCheck oc{c.basis[k], v.holds && v.test.max_residual < opt.tolerance, v.test};
    rep.max_residual = std::max(rep.max_residual, v.test.max_residual);
    if (!oc.holds) {
      std::string w;
      if (v.test.witness)
        w = " at (t,x)=(" + std::to_string(v.test.witness->first) + "," + std::to_string(v.test.witness->second) + ")";
      rep.failures.push_back("operator " + c.basis[k] + " residual " + std::to_string(v.test.max_residual) + w);
    }
    rep.operators.push_back(std::move(oc));
  }

  try {
    const auto sr = verify_structure_constants(fields, plan);
    rep.closed = sr.closed;
    rep.closure_residual = sr.max_residual;
    if (!sr.closed) rep.failures.push_back("basis not closed, residual " + std::to_string(sr.max_residual));
  } catch (const std::exception& e) {
    rep.closure_error = e.what();
    rep.failures.push_back(std::string("closure: ") + e.what());
  }

  if (vo.check_canon && c.canon && c.n1_ref) {
    rep.canon = detail::check_canon(c, p, b, V, opt);
    if (!rep.canon->passed)
      rep.failures.push_back("canonical map to " + *c.n1_ref + " failed" +
                             (rep.canon->error.empty() ? ", residual " + std::to_string(rep.canon->test.max_residual)
                                                       : ": " + rep.canon->error));
  }

  if (vo.check_dimension) {
    DimensionCheck d;
    d.expected = fields.size();
    const auto sol = solve_symmetries(p, V, c.ansatz_space(p, b), plan);
    d.found = sol.dimension;
    d.gap = sol.gap;
    d.verified = sol.verified;
    d.passed = d.found == d.expected && sol.verified && d.gap > vo.gap_threshold;
    if (!d.passed)
      rep.failures.push_back("dimension " + std::to_string(d.found) + " (expected " + std::to_string(d.expected) +
                             "), gap " + std::to_string(d.gap));
    rep.dimension = d;
  }
  return rep;
}

struct VerifySummary {
  std::vector<CaseReport> reports;
  std::size_t instances = 0;
  std::size_t failed = 0;
  std::size_t min_points = 0;
  double max_residual = 0.0;
  double seconds = 0.0;

  bool all_passed() const { return failed == 0; }
};

/// verify_case over every entry of `cases` and every grid instance at each p.
inline VerifySummary verify_all(const std::vector<ClassCase>& cases, const std::vector<ModelParams>& p_list,
                                const PlanOptions& opt, const VerifyOptions& vo = {}) {
  VerifySummary s;
  const auto start = std::chrono::steady_clock::now();
  bool first = true;
  for (const auto& p : p_list)
    for (const auto& c : cases)
      for (const auto& b : grid_instances(c, p)) {
        CaseReport r = verify_case(c, b, p, opt, vo);
        ++s.instances;
        if (!r.passed()) ++s.failed;
        s.min_points = first ? r.points : std::min(s.min_points, r.points);
        first = false;
        s.max_residual = std::max(s.max_residual, r.max_residual);
        s.reports.push_back(std::move(r));
      }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

inline VerifySummary verify_all(const std::vector<ModelParams>& p_list, const PlanOptions& opt,
                                const VerifyOptions& vo = {}) {
  return verify_all(case_catalog(), p_list, opt, vo);
}

/// Catalog entries specific to one side of the gamma = 4 split.
inline std::vector<ClassCase> cases_for_regime(Regime r) {
  std::vector<ClassCase> out;
  for (const auto& c : case_catalog())
    if (c.regime == r) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ZeroTest& z) {
  nlohmann::json j{{"verdict", to_string(z.verdict)}, {"grade", to_string(z.grade())},
                   {"max_residual", z.max_residual},  {"tolerance", z.tolerance},
                   {"points", z.points}};
  if (z.witness) j["witness"] = {{"t", z.witness->first}, {"x", z.witness->second}};
  return j;
}

inline nlohmann::json to_json(const CaseReport& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["gamma"] = to_string(r.gamma);
  j["bindings"] = r.bindings;
  j["potential"] = r.potential;
  j["points"] = r.points;
  j["max_residual"] = r.max_residual;
  j["operators"] = nlohmann::json::array();
  for (const auto& o : r.operators) j["operators"].push_back({{"field", o.field}, {"holds", o.holds}, {"test", to_json(o.test)}});
  j["closure"] = {{"closed", r.closed}, {"max_residual", r.closure_residual}, {"tolerance", 1e-8}};
  if (!r.closure_error.empty()) j["closure"]["error"] = r.closure_error;
  if (r.canon) {
    const auto& c = *r.canon;
    j["canon"] = {{"target", c.target}, {"target_bindings", c.target_bindings}, {"map", c.map},
                  {"transformed", c.transformed}, {"expected", c.expected}, {"passed", c.passed}, {"test", to_json(c.test)}};
    if (!c.error.empty()) j["canon"]["error"] = c.error;
  }
  if (r.dimension) {
    const auto& d = *r.dimension;
    j["dimension"] = {{"expected", d.expected}, {"found", d.found},
                        {"gap", std::isfinite(d.gap) ? nlohmann::json(d.gap) : nlohmann::json("inf")}, {"verified", d.verified}, {"passed", d.passed}};
  }
  j["passed"] = r.passed();
  j["failures"] = r.failures;
  return j;
}

}  // namespace nlsgc
