#pragma once

#include "nlsgc/classifier.hpp"
#include "nlsgc/equiv.hpp"
#include "nlsgc/invariance.hpp"
#include "nlsgc/liealg.hpp"
#include "nlsgc/parse.hpp"
#include "nlsgc/tables.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace nlsgc::cli {

using nlsgc::to_string;

inline constexpr int kReportVersion = 1;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

enum class Command { VerifyTables, Classify, Symmetries, Transform, Bracket, Catalog };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::VerifyTables: return "verify-tables";
    case Command::Classify: return "classify";
    case Command::Symmetries: return "symmetries";
    case Command::Transform: return "transform";
    case Command::Bracket: return "bracket";
    case Command::Catalog: return "catalog";
  }
  return "?";
}

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  Command command = Command::Catalog;
  std::vector<Rational> gammas;  // verify-tables takes several
  std::string potential_text;
  std::map<std::string, Rational> bindings;
  std::string ansatz_spec = "rich";
  std::string transform_spec;  // EquivMap JSON
  std::string q1, q2;
  std::uint64_t seed = PlanOptions{}.seed;
  double tolerance = PlanOptions{}.tolerance;
  bool json = true;
  bool declared_general = false;
  bool skip_dimension = false;

  Rational gamma() const {
    if (gammas.empty()) throw ConfigError("--gamma is required");
    return gammas.front();
  }
  PlanOptions plan() const {
    PlanOptions o;
    o.seed = seed;
    o.tolerance = tolerance;
    return o;
  }
};

/// "name=p/q"; floats are rejected.
inline std::pair<std::string, Rational> parse_binding(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("binding '" + s + "' must look like name=p/q");
  std::string name = s.substr(0, eq);
  try {
    return {name, parse_exact_rational(s.substr(eq + 1))};
  } catch (const std::exception& e) {
    throw ConfigError("binding '" + s + "': " + e.what());
  }
}

inline Rational parse_gamma(const std::string& s) {
  Rational g;
  try {
    g = parse_exact_rational(s);
  } catch (const std::exception& e) {
    throw ConfigError("gamma '" + s + "': " + e.what());
  }
  if (g == 0) throw ConfigError("gamma must be nonzero");
  return g;
}

/// Raw option values as CLI11 fills them; finish() validates into a RunConfig.
struct RawOptions {
  std::vector<std::string> gamma;
  std::string potential;
  std::vector<std::string> bind;
  std::string ansatz = "rich";
  std::string map;
  std::string q1, q2;
  std::uint64_t seed = PlanOptions{}.seed;
  double tolerance = PlanOptions{}.tolerance;
  std::string format = "json";
  bool general = false;
  bool no_dimension = false;
};

inline void setup(CLI::App& app, RawOptions& raw, Command& cmd) {
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value config file (same names as the flags)");
  app.add_option("--seed", raw.seed, "seed for every sample plan")->capture_default_str();
  app.add_option("--tolerance", raw.tolerance, "zero-test tolerance")->envname("NLSGC_TOLERANCE")->capture_default_str();
  app.add_option("--format", raw.format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  app.add_option("--bind", raw.bind, "parameter binding name=p/q (repeatable)");

  auto* vt = app.add_subcommand("verify-tables", "replay Tables 1-3 on the binding grid");
  vt->add_option("--gamma", raw.gamma, "gamma values (default: the full grid)");
  vt->add_flag("--no-dimension", raw.no_dimension, "skip the solver dimension check");
  vt->callback([&] { cmd = Command::VerifyTables; });

  auto* cl = app.add_subcommand("classify", "classify a potential to its canonical case");
  cl->add_option("--gamma", raw.gamma)->required();
  cl->add_option("--potential", raw.potential)->required();
  cl->add_flag("--general", raw.general, "declare a t-free potential outside the grammar generic");
  cl->callback([&] { cmd = Command::Classify; });

  auto* sy = app.add_subcommand("symmetries", "solve the classifying condition on an ansatz");
  sy->add_option("--gamma", raw.gamma)->required();
  sy->add_option("--potential", raw.potential)->required();
  sy->add_option("--ansatz", raw.ansatz, "\"rich\" or \"xi:..;chi:..;lam:..\"")->capture_default_str();
  sy->callback([&] { cmd = Command::Symmetries; });

  auto* tr = app.add_subcommand("transform", "apply an equivalence transformation to a potential");
  tr->add_option("--gamma", raw.gamma)->required();
  tr->add_option("--potential", raw.potential)->required();
  tr->add_option("--map", raw.map, "JSON {T, X, Psi, reflect_x, reflect_t, domain} or @file")->required();
  tr->callback([&] { cmd = Command::Transform; });

  auto* br = app.add_subcommand("bracket", "Lie bracket of two fields D:..+G:..+M:..");
  br->add_option("--q1", raw.q1)->required();
  br->add_option("--q2", raw.q2)->required();
  br->callback([&] { cmd = Command::Bracket; });

  auto* ca = app.add_subcommand("catalog", "dump the embedded case catalog");
  ca->callback([&] { cmd = Command::Catalog; });
}

inline RunConfig finish(const RawOptions& raw, Command cmd) {
  RunConfig c;
  c.command = cmd;
  for (const auto& g : raw.gamma) c.gammas.push_back(parse_gamma(g));
  c.potential_text = raw.potential;
  for (const auto& b : raw.bind) c.bindings.insert(parse_binding(b));
  c.ansatz_spec = raw.ansatz;
  c.transform_spec = raw.map;
  if (!c.transform_spec.empty() && c.transform_spec.front() == '@') {
    std::ifstream in(c.transform_spec.substr(1));
    if (!in) throw ConfigError("cannot read map file " + c.transform_spec.substr(1));
    std::stringstream ss;
    ss << in.rdbuf();
    c.transform_spec = ss.str();
  }
  c.q1 = raw.q1;
  c.q2 = raw.q2;
  c.seed = raw.seed;
  if (!(raw.tolerance > 0)) throw ConfigError("tolerance must be positive");
  c.tolerance = raw.tolerance;
  c.json = raw.format == "json";
  c.declared_general = raw.general;
  c.skip_dimension = raw.no_dimension;
  return c;
}

namespace detail {

inline nlohmann::json header(const RunConfig& c) {
  nlohmann::json j;
  j["schema"] = "nlsgc-report";
  j["version"] = kReportVersion;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed;
  j["tolerance"] = c.tolerance;
  return j;
}

inline nlohmann::json field_json(const VectorField& q) { return q.str(); }

inline Potential read_potential(const RunConfig& c, const ModelParams& p) {
  try {
    return Potential(parse(c.potential_text, make_bindings(p, c.bindings)), c.bindings);
  } catch (const ParseError& e) {
    throw ConfigError("potential: " + std::string(e.what()));
  }
}

inline int verify_tables(const RunConfig& c, nlohmann::json& out, std::ostream& text) {
  std::vector<ModelParams> ps;
  if (c.gammas.empty()) ps = grid_gammas();
  for (const auto& g : c.gammas) ps.emplace_back(g);
  VerifyOptions vo;
  vo.check_dimension = !c.skip_dimension;
  const VerifySummary s = verify_all(ps, c.plan(), vo);
  out["gammas"] = nlohmann::json::array();
  for (const auto& p : ps) out["gammas"].push_back(to_string(p.gamma));
  out["instances"] = s.instances;
  out["failed"] = s.failed;
  out["min_points"] = s.min_points;
  out["max_residual"] = s.max_residual;
  out["all_passed"] = s.all_passed();
  out["failures"] = nlohmann::json::array();
  out["cases"] = nlohmann::json::array();
  for (const auto& r : s.reports) {
    out["cases"].push_back(to_json(r));
    if (r.passed()) continue;
    nlohmann::json f;
    f["id"] = r.id;
    f["gamma"] = to_string(r.gamma);
    f["bindings"] = r.bindings;
    f["reasons"] = r.failures;
    out["failures"].push_back(f);
  }
  text << "instances " << s.instances << ", failed " << s.failed << ", min points " << s.min_points
       << ", max residual " << s.max_residual << "\n";
  for (const auto& r : s.reports) {
    text << (r.passed() ? "PASS " : "FAIL ") << r.id << " gamma=" << to_string(r.gamma);
    for (const auto& [k, v] : r.bindings) text << " " << k << "=" << v;
    text << "\n";
    for (const auto& f : r.failures) text << "    " << f << "\n";
  }
  return s.all_passed() ? kOk : kCheckFailed;
}

inline int classify_cmd(const RunConfig& c, nlohmann::json& out, std::ostream& text) {
  const ModelParams p(c.gamma());
  const Potential V = read_potential(c, p);
  out["gamma"] = to_string(p.gamma);
  out["potential"] = V.v.str();
  ClassifyOptions opt;
  opt.plan = c.plan();
  opt.declared_general = c.declared_general;
  try {
    const ClassificationResult r = classify(p, V, opt);
    out["result"] = to_json(r);
    text << "case " << r.case_id;
    for (const auto& [k, v] : r.bindings) text << " " << k << "=" << to_string(v);
    text << " (" << to_string(r.grade) << ")\n";
    if (r.canon)
      text << "canon T=" << r.canon->time.T.str() << " X=" << r.canon->X.str() << " Psi=" << r.canon->Psi.str()
           << (r.canon->reflect_x ? " I_x" : "") << (r.canon->reflect_t ? " I_t" : "") << "\n";
    if (r.canon_target) text << "target " << *r.canon_target << ": " << r.canon_potential << "\n";
    for (const auto& n : r.notes) text << "note: " << n << "\n";
    const bool ok = !r.canon_test || r.canon_test->zero();
    return ok ? kOk : kCheckFailed;
  } catch (const TemplateRejection& e) {
    out["error"] = {{"kind", "TemplateRejection"}, {"message", e.what()}, {"subterm", e.subterm}};
    text << "rejected: " << e.what() << " [" << e.subterm << "]\n";
    return kCheckFailed;
  }
}

inline int symmetries_cmd(const RunConfig& c, nlohmann::json& out, std::ostream& text) {
  const ModelParams p(c.gamma());
  const Potential V = read_potential(c, p);
  AnsatzSpace a;
  try {
    a = c.ansatz_spec == "rich" ? AnsatzSpace::rich() : AnsatzSpace::parse_spec(c.ansatz_spec, make_bindings(p, c.bindings));
  } catch (const ParseError& e) {
    throw ConfigError("ansatz: " + std::string(e.what()));
  }
  const SamplePlan plan = make_plan(c.plan(), {V.v});
  const SolveReport s = solve_symmetries(p, V, a, plan);
  out["gamma"] = to_string(p.gamma);
  out["potential"] = V.v.str();
  out["dimension"] = s.dimension;
  out["basis"] = nlohmann::json::array();
  for (const auto& q : s.basis) out["basis"].push_back(field_json(q));
  out["gap"] = std::isfinite(s.gap) ? nlohmann::json(s.gap) : nlohmann::json("inf");
  out["singular_values"] = s.singular_values;
  out["unknowns"] = s.unknowns;
  out["rows"] = s.rows;
  out["laurent_rows"] = s.laurent_rows;
  out["snap_failure"] = s.snap_failure;
  out["verified"] = s.verified;
  out["max_residual"] = s.max_residual;
  text << "dimension " << s.dimension << " (gap " << s.gap << ")\n";
  for (const auto& q : s.basis) text << "  " << q.str() << "\n";
  return s.verified && !s.snap_failure ? kOk : kCheckFailed;
}

inline int transform_cmd(const RunConfig& c, nlohmann::json& out, std::ostream& text) {
  const ModelParams p(c.gamma());
  const Potential V = read_potential(c, p);
  EquivMap m;
  try {
    m = equiv_map_from_json(nlohmann::json::parse(c.transform_spec), make_bindings(p, c.bindings));
  } catch (const std::exception& e) {
    throw ConfigError("map: " + std::string(e.what()));
  }
  out["gamma"] = to_string(p.gamma);
  out["potential"] = V.v.str();
  out["map"] = to_json(m);
  try {
    check_domain(m.time, make_plan(c.plan()));
  } catch (const DomainViolation& e) {
    out["error"] = {{"kind", "DomainViolation"}, {"message", e.what()}};
    text << "domain violation: " << e.what() << "\n";
    return kCheckFailed;
  }
  try {
    const Potential got = apply_to_potential(m, p, V);
    out["transformed"] = got.v.str();
    text << got.v.str() << "\n";
  } catch (const UnregisteredInverse& e) {
    // numeric evaluation only
    out["transformed"] = nullptr;
    out["note"] = e.what();
    out["samples"] = nlohmann::json::array();
    const double img_lo = std::max(-3.0, m.time.image.lo), img_hi = std::min(3.0, m.time.image.hi);
    for (int k = 1; k <= 5; ++k) {
      const double t = img_lo + (img_hi - img_lo) * k / 6.0, x = 0.5 * k - 1.0;
      const auto v = apply_numeric(m, p, V, t, x);
      out["samples"].push_back({{"t", t}, {"x", x}, {"re", v.real()}, {"im", v.imag()}});
      text << "V~(" << t << ", " << x << ") = " << v.real() << " + " << v.imag() << " i\n";
    }
  }
  return kOk;
}

inline int bracket_cmd(const RunConfig& c, nlohmann::json& out, std::ostream& text) {
  VectorField a, b;
  try {
    const Bindings bb = [&] {
      Bindings r;
      for (const auto& [k, v] : c.bindings) r[k] = Expr(v);
      return r;
    }();
    a = parse_field(c.q1, bb);
    b = parse_field(c.q2, bb);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const VectorField r = bracket(a, b);
  out["q1"] = a.str();
  out["q2"] = b.str();
  out["bracket"] = r.str();
  text << r.str() << "\n";
  return kOk;
}

}  // namespace detail

/// Executes one subcommand; the report goes to out, diagnostics to err.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  nlohmann::json report = detail::header(c);
  std::ostringstream text;
  int code = kOk;
  try {
    switch (c.command) {
      case Command::VerifyTables: code = detail::verify_tables(c, report, text); break;
      case Command::Classify: code = detail::classify_cmd(c, report, text); break;
      case Command::Symmetries: code = detail::symmetries_cmd(c, report, text); break;
      case Command::Transform: code = detail::transform_cmd(c, report, text); break;
      case Command::Bracket: code = detail::bracket_cmd(c, report, text); break;
      case Command::Catalog:
        report["catalog"] = catalog_json();
        text << std::setw(2) << catalog_json() << "\n";
        break;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  report["exit_code"] = code;
  if (c.json) out << report.dump(2) << "\n";
  else out << text.str();
  return code;
}

/// Full command line: parse, validate, run.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symmetry classification engine for i psi_t + psi_xx + |psi|^gamma psi + V(t,x) psi = 0"};
  RawOptions raw;
  Command cmd = Command::Catalog;
  setup(app, raw, cmd);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  RunConfig cfg;
  try {
    cfg = finish(raw, cmd);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return run(cfg, out, err);
}

}  // namespace nlsgc::cli
