#include <catch_amalgamated.hpp>

#include "nlsgc/classifier.hpp"

using namespace nlsgc;

namespace {

ClassificationResult run(const Rational& g, const std::string& v) {
  const ModelParams p(g);
  return classify(p, Potential(parse(v, make_bindings(p))));
}

Rational param(const ClassificationResult& r, const std::string& name) { return r.bindings.at(name); }

}  // namespace

TEST_CASE("free and time-dependent potentials", "[classifier]") {
  CHECK(run(2, "0").case_id == "1.5a");
  CHECK(run(4, "0").case_id == "1.5b");
  CHECK(run(4, "i").case_id == "1.4");
  CHECK(run(2, "i*exp(t)").case_id == "1.1");

  const auto r = run(2, "3/t + i/t");
  CHECK(r.case_id == "1.3");
  CHECK(param(r, "nu") == 1);
  REQUIRE(r.canon.has_value());
  CHECK(r.grade == Grade::Proved);
}

TEST_CASE("stationary potentials", "[classifier]") {
  CHECK(run(4, "-x^2").case_id == "3.11");
  CHECK(run(4, "x^2").case_id == "3.10");
  CHECK(run(2, "x").case_id == "2.8");
  CHECK_THROWS_AS(run(2, "x^4"), TemplateRejection);

  const auto a = run(2, "x^2 + i + x^(-2)");
  CHECK(a.case_id == "2.2");
  CHECK(param(a, "alpha") == 1);
  CHECK(param(a, "beta") == 0);
  CHECK(a.canon_target == "1.7a");
  REQUIRE(a.canon.has_value());
  CHECK(a.canon->time.T == parse("-exp(-4*t)"));

  const auto b = run(2, "x^2 + 5*i");
  CHECK(b.case_id == "2.6");
  CHECK(param(b, "nu") == 5);
  CHECK(b.canon_target == "1.3");
  // (gh - nu)/4 = -1, then tau: gh/2 + 1 = 3/2
  CHECK(b.canon_bindings.at("nu") == Rational(3, 2));
}

TEST_CASE("canonical maps are checked against the target template", "[classifier]") {
  for (const auto& [g, v] : std::vector<std::pair<Rational, std::string>>{
           {2, "x^2+5*i"}, {2, "x+2*i"}, {4, "-x^2+3*i"}, {3, "4*x^2+4*x+3*i"}, {4, "x^2+(1+i)*x^(-2)"}}) {
    const ModelParams p(g);
    const auto r = classify(p, Potential(parse(v)));
    INFO(v << " -> " << r.case_id);
    REQUIRE(r.canon.has_value());
    REQUIRE(r.canon_test.has_value());
    CHECK(r.canon_test->zero());
    // oracle: apply the returned map ourselves
    const Expr got = apply_to_potential(*r.canon, p, Potential(parse(v))).v;
    SamplePlan plan = make_plan(PlanOptions{}, {got, parse(r.canon_potential)});
    CHECK(is_zero(got - parse(r.canon_potential), plan).zero());
  }
}

TEST_CASE("outside the grammar", "[classifier]") {
  CHECK_THROWS_AS(run(2, "sin(x)"), TemplateRejection);
  CHECK(run(2, "t*x^3").case_id == "1.0");
  const ModelParams p(Rational(2));
  ClassifyOptions opt;
  opt.declared_general = true;
  CHECK(classify(p, Potential(parse("sin(x)")), opt).case_id == "2.0");
  CHECK(classify(p, Potential(parse("x^4")), opt).case_id == "2.0");
  CHECK(classify(ModelParams(Rational(4)), Potential(parse("x^4")), opt).case_id == "3.0");
}

TEST_CASE("classes are stable along equivalence orbits", "[classifier]") {
  // maps that keep each subclass: x-shift, time scaling, both reflections
  const std::vector<EquivMap> moves = [] {
    std::vector<EquivMap> out;
    EquivMap shift;
    shift.X = Expr(2);
    out.push_back(shift);
    EquivMap scale;
    scale.time = TimeMap::affine(4, 0);
    scale.time.sqrt_Tt = Expr(2);
    out.push_back(scale);
    out.push_back(EquivMap::Ix());
    out.push_back(EquivMap::It());
    return out;
  }();
  std::size_t checked = 0;
  for (const auto& p : grid_gammas())
    for (const auto& c : case_catalog()) {
      if (!c.applies(p)) continue;
      for (const auto& b : grid_instances(c, p)) {
        const Potential V = c.potential(p, b);
        for (const auto& m : moves) {
          const Potential W = apply_to_potential(m, p, V);
          INFO(c.id << " gamma=" << to_string(p.gamma) << " V=" << V.v.str() << " moved=" << W.v.str());
          const auto r = classify(p, W, options_for(c));
          CHECK(same_or_canonical(r.case_id, c, p));
          ++checked;
        }
      }
    }
  CHECK(checked > 400);
}

TEST_CASE("symmetry dimension is preserved by classification", "[classifier]") {
  // shifted quadratics need exponential chi and lambda, beyond the rich ansatz
  const std::string shifted =
      "xi:1,t,exp(4*t),exp(-4*t),cos(4*t),sin(4*t);"
      "chi:1,t,exp(2*t),exp(-2*t),cos(2*t),sin(2*t),exp(4*t),exp(-4*t),cos(4*t),sin(4*t);"
      "lam:1,t,exp(2*t),exp(-2*t),cos(2*t),sin(2*t),exp(4*t),exp(-4*t),cos(4*t),sin(4*t)";
  for (const auto& [g, v, ansatz] : std::vector<std::tuple<Rational, std::string, std::string>>{
           {2, "x^2+5*i", "rich"}, {2, "2/t+i/t", "rich"}, {3, "i/(t^2+1)", "rich"}, {2, "x+3*i", "rich"},
           {2, "4*x", "rich"}, {2, "-x^2+2*i", "rich"}, {6, "(x-1)^(-2)", "rich"},
           {2, "(x-1)^2+i", shifted}, {4, "x^2-2*x", shifted}, {4, "-x^2+4*x+3*i", shifted}}) {
    const ModelParams p(g);
    const Potential V(parse(v));
    const auto r = classify(p, V);
    const AnsatzSpace a = ansatz == "rich" ? AnsatzSpace::rich() : AnsatzSpace::parse_spec(ansatz);
    const SolveReport s = solve_symmetries(p, V, a, make_plan(PlanOptions{}, {V.v}));
    INFO(v << " -> " << r.case_id);
    CHECK(s.dimension == find_case(r.case_id).basis.size());
  }
}

TEST_CASE("self-consistency over the catalog", "[classifier]") {
  std::size_t total = 0, ok = 0;
  for (const auto& p : grid_gammas())
    for (const auto& c : case_catalog()) {
      if (!c.applies(p)) continue;
      for (const auto& b : grid_instances(c, p)) {
        ++total;
        const auto r = classify(p, c.potential(p, b), options_for(c));
        INFO(c.id << " gamma=" << to_string(p.gamma) << " got " << r.case_id);
        CHECK(same_or_canonical(r.case_id, c, p));
        if (same_or_canonical(r.case_id, c, p)) ++ok;
      }
    }
  CHECK(ok == total);
}

TEST_CASE("result JSON", "[classifier]") {
  const auto j = to_json(run(4, "x^2"));
  CHECK(j.at("case") == "3.10");
  CHECK(j.at("canon").at("T") == "-exp(-4*t)");
  CHECK(j.at("grade") == "Proved");
}
