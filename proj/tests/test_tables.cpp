#include <catch_amalgamated.hpp>

#include "nlsgc/tables.hpp"

#include <algorithm>
#include <set>

using namespace nlsgc;

namespace {

std::set<std::string> basis_set(const ClassCase& c, const ModelParams& p, const Bindings& b) {
  std::set<std::string> out;
  for (const auto& q : c.fields(p, b)) out.insert(q.str());
  return out;
}

std::set<std::string> strs(std::initializer_list<const char*> l) {
  std::set<std::string> out;
  for (const char* s : l) out.insert(parse_field(s).str());
  return out;
}

}  // namespace

TEST_CASE("catalog shape", "[tables]") {
  const auto& cat = case_catalog();
  CHECK(cat.size() == 32);
  CHECK(std::count_if(cat.begin(), cat.end(), [](const ClassCase& c) { return c.regime == Regime::Critical; }) == 14);
  CHECK(std::count_if(cat.begin(), cat.end(), [](const ClassCase& c) { return c.table == 2; }) == 10);
  CHECK(std::count_if(cat.begin(), cat.end(), [](const ClassCase& c) { return c.table == 3; }) == 12);
  for (const auto& c : cat) {
    const ClassCase back = case_from_json(to_json(c));
    CHECK(back.id == c.id);
    CHECK(back.basis == c.basis);
    CHECK(back.potential_template == c.potential_template);
  }
  CHECK_THROWS_AS(find_case("9.9"), UnknownCase);
  CHECK(find_case("1.5", ModelParams(Rational(4))).id == "1.5b");
  CHECK(find_case("1.5", ModelParams(Rational(2))).id == "1.5a");
}

TEST_CASE("table 1 bases as printed", "[tables]") {
  // d_x = G(1), d_t = D(1)
  const ModelParams g2(Rational(2)), g4(Rational(4));
  const Bindings none;
  CHECK(basis_set(find_case("1.1"), g2, none) == strs({"M:1", "G:1", "G:t"}));
  CHECK(basis_set(find_case("1.2"), g2, none) == strs({"M:1", "G:1", "G:t", "D:t^2+1"}));
  CHECK(basis_set(find_case("1.3"), g2, none) == strs({"M:1", "G:1", "G:t", "D:t"}));
  CHECK(basis_set(find_case("1.4"), g2, none) == strs({"M:1", "G:1", "G:t", "D:1"}));
  CHECK(basis_set(find_case("1.5a"), g2, none) == strs({"M:1", "G:1", "G:t", "D:1", "D:t"}));
  CHECK(basis_set(find_case("1.5b"), g4, none) == strs({"M:1", "G:1", "G:t", "D:1", "D:t", "D:t^2"}));
  CHECK(basis_set(find_case("1.6"), g2, none) == strs({"M:1", "D:1"}));
  CHECK(basis_set(find_case("1.7a"), g2, none) == strs({"M:1", "D:1", "D:t"}));
  CHECK(basis_set(find_case("1.7b"), g4, none) == strs({"M:1", "D:1", "D:t", "D:t^2"}));
}

TEST_CASE("grid instances respect constraints", "[tables]") {
  std::size_t total = 0;
  for (const auto& p : grid_gammas())
    for (const auto& c : case_catalog()) {
      if (!c.applies(p)) continue;
      for (const auto& b : grid_instances(c, p)) {
        CHECK(satisfies_constraints(c, p, b));
        ++total;
      }
    }
  CHECK(total >= 40);
}

TEST_CASE("constraint violations are reported", "[tables]") {
  const ModelParams p(Rational(2));
  // nu = gh/2 is excluded from 1.3
  CHECK_THROWS_AS(check_constraints(find_case("1.3"), p, {{"nu", Expr(Rational(1, 2))}}), ConstraintViolation);
  CHECK_THROWS_AS(check_constraints(find_case("1.3"), p, {}), ConstraintViolation);
  CHECK_THROWS_AS(check_constraints(find_case("1.5b"), p, {}), ConstraintViolation);
  CHECK_THROWS_AS(check_constraints(find_case("1.7a"), p, {{"alpha", Expr(0)}, {"beta", Expr(0)}}), ConstraintViolation);
  CHECK_NOTHROW(check_constraints(find_case("1.3"), p, {{"nu", Expr(1)}}));
  CHECK_THROWS_AS(verify_case(find_case("1.3"), {{"nu", Expr(Rational(1, 2))}}, p, PlanOptions{}), ConstraintViolation);
}

TEST_CASE("verify a row", "[tables]") {
  const ModelParams p(Rational(2));
  const CaseReport r = verify_case(find_case("2.2"), {{"alpha", Expr(1)}, {"beta", Expr(1)}}, p, PlanOptions{});
  CHECK(r.passed());
  CHECK(r.points >= 200);
  CHECK(r.max_residual < 1e-9);
  CHECK(r.closed);
  REQUIRE(r.canon.has_value());
  CHECK(r.canon->target == "1.7a");
  REQUIRE(r.dimension.has_value());
  CHECK(r.dimension->found == 3);
}

TEST_CASE("a corrupted row fails with a witness", "[tables]") {
  ClassCase bad = find_case("1.5a");
  bad.basis.push_back("D:t^3");
  const CaseReport r = verify_case(bad, {}, ModelParams(Rational(2)), PlanOptions{});
  CHECK_FALSE(r.passed());
  REQUIRE(r.operators.size() == 6);
  CHECK_FALSE(r.operators.back().holds);
  CHECK(r.operators.back().test.witness.has_value());
  CHECK(std::any_of(r.failures.begin(), r.failures.end(),
                    [](const std::string& f) { return f.find("D:t^3") != std::string::npos && f.find("(t,x)") != std::string::npos; }));
}

TEST_CASE("gamma = 4 splits the free case", "[tables]") {
  const SamplePlan plan = make_plan(PlanOptions{});
  const VectorField q = parse_field("D:t^2");
  for (const auto& p : grid_gammas())
    CHECK(is_symmetry(p, Potential(Expr(0)), q, plan).holds == p.critical());
}

TEST_CASE("full grid", "[tables]") {
  const VerifySummary s = verify_all(grid_gammas(), PlanOptions{});
  for (const auto& r : s.reports)
    for (const auto& f : r.failures) FAIL_CHECK(r.id << " gamma=" << to_string(r.gamma) << ": " << f);
  CHECK(s.all_passed());
  CHECK(s.instances >= 40);
  CHECK(s.min_points >= 200);
  CHECK(s.max_residual < 1e-9);
}

TEST_CASE("report JSON", "[tables]") {
  const CaseReport r = verify_case(find_case("1.4"), {}, ModelParams(Rational(3)), PlanOptions{});
  const nlohmann::json j = to_json(r);
  CHECK(j.at("id") == "1.4");
  CHECK(j.contains("max_residual"));
  CHECK(j.at("operators").size() == 4);
  CHECK(j.at("operators")[0].at("test").contains("tolerance"));
}
