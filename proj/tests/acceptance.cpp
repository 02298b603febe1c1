// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "nlsgc/nlsgc.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace nlsgc;

namespace {

struct Verdict {
  bool ok = true;
  std::ostringstream detail;
};

double residual(const Expr& a, const Expr& b) {
  const SamplePlan plan = make_plan(PlanOptions{}, {a, b});
  return is_zero(a - b, plan).max_residual;
}

Potential pot(const std::string& s, const ModelParams& p) { return Potential(parse(s, make_bindings(p))); }

EquivMap map_of(const std::string& json, const Bindings& b = {}) {
  return equiv_map_from_json(nlohmann::json::parse(json), b);
}

VerifySummary grid_summary;

void table_verification(Verdict& v) {
  grid_summary = verify_all(grid_gammas(), PlanOptions{});
  const auto& s = grid_summary;
  v.ok = s.all_passed() && s.instances >= 40 && s.min_points >= 200 && s.max_residual < 1e-9 && s.seconds < 60;
  v.detail << s.instances << " instances, " << s.failed << " failed, min points " << s.min_points
           << ", max residual " << s.max_residual << ", " << s.seconds << " s";
  for (const auto& r : s.reports)
    for (const auto& f : r.failures) v.detail << "\n    " << r.id << " gamma=" << to_string(r.gamma) << ": " << f;
}

void closure(Verdict& v) {
  double worst = 0;
  std::size_t open = 0;
  for (const auto& r : grid_summary.reports) {
    worst = std::max(worst, r.closure_residual);
    if (!r.closed || r.closure_residual >= 1e-8) ++open;
  }
  const auto rep = verify_structure_constants({parse_field("D:1"), parse_field("D:t"), parse_field("D:t^2")},
                                              make_plan(PlanOptions{}));
  auto c = [&](int i, int j, int k) { return snap_rational(rep.constants[i][j][k].real()); };
  bool sl2 = rep.closed;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        Rational want = 0;
        if (i == 0 && j == 1 && k == 0) want = 1;
        if (i == 0 && j == 2 && k == 1) want = 2;
        if (i == 1 && j == 2 && k == 2) want = 1;
        if (i > j) continue;
        if (c(i, j, k) != want) sl2 = false;
      }
  v.ok = open == 0 && sl2;
  v.detail << grid_summary.reports.size() << " algebras, " << open << " not closed, max residual " << worst
           << "; sl(2) constants " << (sl2 ? "exact" : "mismatch");
}

void remark_maps(Verdict& v) {
  double worst = 0;
  std::size_t n = 0;
  auto check = [&](double r) {
    worst = std::max(worst, r);
    ++n;
  };
  const Expr t = Expr::t();
  for (const auto& p : grid_gammas()) {
    const Rational gh = p.gamma_hat;
    const std::vector<Rational> nus = {Rational(1, 3), 1, 2, 5};
    for (const auto& nu : nus) {
      const Expr i_nu = Expr::i() * Expr(nu);
      const Bindings b = {{"nu", Expr(nu)}};
      // x^2 + i nu -> i nu~/t, nu~ = (gh - nu)/4
      check(residual(apply_to_potential(map_of(R"j({"T": "-exp(-4*t)"})j"), p, Potential(parse("x^2") + i_nu)).v,
                     Expr::i() * Expr((gh - nu) / 4) / t));
      // -x^2 + i nu -> i/2 (gh t + nu~)/(t^2+1), nu~ = nu
      check(residual(apply_to_potential(map_of(R"j({"T": "tan(2*t)"})j"), p, Potential(parse("-x^2") + i_nu)).v,
                     constant(1, 2) * Expr::i() * (Expr(gh) * t + Expr(nu)) / (t * t + 1)));
      // x + i nu -> i
      check(residual(apply_to_potential(map_of(R"j({"T": "nu*t", "X": "-sqrt(nu)*t^2", "Psi": "t^3/3"})j", b), p,
                                        Potential(parse("x") + i_nu)).v,
                     Expr::i()));
    }
    // x -> 0
    check(residual(apply_to_potential(map_of(R"j({"T": "t", "X": "-t^2", "Psi": "t^3/3"})j"), p, pot("x", p)).v, Expr(0)));
    // x^2 + i gh -> 0, -x^2 -> 0 at gamma = 4
    check(residual(apply_to_potential(map_of(R"j({"T": "-exp(-4*t)"})j"), p, pot("x^2+i*gh", p)).v, Expr(0)));
    if (p.critical())
      check(residual(apply_to_potential(map_of(R"j({"T": "tan(2*t)"})j"), p, pot("-x^2", p)).v, Expr(0)));
  }
  v.ok = worst < 1e-9;
  v.detail << n << " transformations, max residual " << worst;
}

void tau(Verdict& v) {
  double worst = 0;
  bool exact = true;
  for (const auto& p : grid_gammas()) {
    const Rational gh = p.gamma_hat;
    for (const Rational& nu : {Rational(-2), Rational(1, 3), Rational(1), Rational(5, 2), Rational(7)}) {
      const Potential V(Expr::i() * Expr(nu) / Expr::t());
      const Expr once = apply_to_potential(EquivMap::tau(), p, V).v;
      if (once != Expr::i() * Expr(gh / 2 - nu) / Expr::t()) exact = false;
      worst = std::max(worst, residual(apply_to_potential(EquivMap::tau(), p, Potential(once)).v, V.v));
    }
    const Potential fixed(Expr::i() * Expr(gh / 4) / Expr::t());
    if (apply_to_potential(EquivMap::tau(), p, fixed).v != fixed.v) exact = false;
  }
  v.ok = exact && worst < 1e-10;
  v.detail << "nu -> gh/2 - nu " << (exact ? "exact" : "mismatch") << ", tau^2 residual " << worst;
}

void dimensions(Verdict& v) {
  struct Row {
    Rational gamma;
    const char* V;
    std::size_t dim;
  };
  const Row rows[] = {{4, "0", 6}, {2, "0", 5}, {4, "x^2", 6}, {2, "x^2+i*gh", 5}, {4, "(1+i)*x^(-2)", 4}, {2, "(1+i)*x^(-2)", 3}};
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    const ModelParams p(r.gamma);
    const Potential V = pot(r.V, p);
    const SolveReport s = solve_symmetries(p, V, AnsatzSpace::rich(), make_plan(PlanOptions{}, {V.v}));
    min_gap = std::min(min_gap, s.gap);
    const bool ok = s.dimension == r.dim && s.gap > 1e4 && s.verified;
    if (!ok) v.ok = false;
    v.detail << r.V << "@" << to_string(r.gamma) << "=" << s.dimension << (ok ? " " : "(!) ");
  }
  v.detail << "min gap " << min_gap;
}

void negative_controls(Verdict& v) {
  const ModelParams p(Rational(2));
  const SamplePlan plan = make_plan(PlanOptions{});
  const auto a = is_symmetry(p, Potential(Expr(0)), parse_field("D:t^2"), plan);
  const auto b = is_symmetry(p, pot("x^2+i*gh", p), parse_field("D:exp(-4*t)"), plan);
  v.ok = !a.holds && a.test.witness && !b.holds && b.test.witness;
  auto w = [](const SymmetryVerdict& s) {
    std::ostringstream o;
    if (s.test.witness) o << "(" << s.test.witness->first << ", " << s.test.witness->second << ")";
    return o.str();
  };
  v.detail << "D(t^2) on 0 fails at " << w(a) << "; D(exp(-4t)) on x^2+i fails at " << w(b);
}

void consistency(Verdict& v) {
  const ModelParams p(Rational(2));
  const Potential V = pot("x^2 + i*t*x", p);
  const std::vector<Rational> eps = {Rational(1, 100), Rational(1, 1000), Rational(1, 10000), Rational(1, 100000)};
  PlanOptions o;
  o.count = 64;
  o.t_range = {-1, 1};
  o.x_range = {-1, 1};
  const SamplePlan plan = make_plan(o);
  for (const auto& g : {InfinitesimalGen{GenKind::Dprime, parse("t^2")}, InfinitesimalGen{GenKind::Gprime, parse("t^2")},
                        InfinitesimalGen{GenKind::Mprime, parse("t^3")}}) {
    const auto r = finite_infinitesimal_consistency(g, p, V, eps, plan);
    const bool ok = r.exact || (r.slope >= 1.8 && r.slope <= 2.2);
    if (!ok) v.ok = false;
    v.detail << to_string(g.kind) << " ";
    if (r.exact) v.detail << "exact ";
    else v.detail << "slope " << r.slope << " ";
  }
}

void self_consistency(Verdict& v) {
  std::size_t total = 0, ok = 0;
  std::ostringstream misses;
  for (const auto& p : grid_gammas())
    for (const auto& c : case_catalog()) {
      if (!c.applies(p)) continue;
      for (const auto& b : grid_instances(c, p)) {
        ++total;
        std::string got;
        try {
          got = classify(p, c.potential(p, b), options_for(c)).case_id;
        } catch (const std::exception& e) {
          got = e.what();
        }
        if (same_or_canonical(got, c, p)) ++ok;
        else misses << "\n    " << c.id << " gamma=" << to_string(p.gamma) << " -> " << got;
      }
    }
  v.ok = ok == total;
  v.detail << ok << "/" << total << " instances" << misses.str();
}

void round_trip(Verdict& v) {
  std::size_t total = 0, ok = 0;
  for (const auto& p : grid_gammas())
    for (const auto& c : case_catalog()) {
      if (!c.applies(p)) continue;
      for (const auto& b : grid_instances(c, p)) {
        const Expr e = c.potential(p, b).v;
        ++total;
        if (parse(e.str()) == e) ++ok;
      }
    }
  v.ok = ok == total;
  v.detail << ok << "/" << total << " potentials";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria = {
      {"table-verification", table_verification}, {"closure-sl2", closure},
      {"remark-maps", remark_maps},               {"tau", tau},
      {"dimensions", dimensions},                 {"negative-controls", negative_controls},
      {"finite-infinitesimal", consistency},      {"classifier-self-consistency", self_consistency},
      {"parser-round-trip", round_trip},
  };
  int failed = 0, k = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      fn(v);
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail << "exception: " << e.what();
    }
    if (!v.ok) ++failed;
    std::cout << (v.ok ? "PASS " : "FAIL ") << ++k << " " << name << ": " << v.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
