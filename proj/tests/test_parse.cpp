#include <catch_amalgamated.hpp>

#include "nlsgc/parse.hpp"
#include "nlsgc/tables.hpp"

using namespace nlsgc;

TEST_CASE("lowering agrees with direct syntax-tree evaluation", "[parse]") {
  // eval_syntax never touches the canonicalizer
  const std::vector<std::string> inputs = {
      "x^2 + i*(4-2)/2", "-exp(-4*t)", "tan(2*t) - sin(2*t)/cos(2*t)", "(1+i)*x^(-2)",
      "3/t + i/t", "1/(t^2+2)", "sqrt(2)*t^3/3", "atan(t) + log(t^2+1)", "-x^2+i*nu",
  };
  const Bindings b = {{"nu", Expr(Rational(3, 2))}};
  for (const auto& s : inputs) {
    const Expr e = parse(s, b);
    const auto tree = parse_syntax(s);
    for (auto [t0, x0] : {std::pair{0.37, 1.1}, std::pair{-0.8, -0.45}}) {
      INFO(s);
      const auto want = eval_syntax(*tree, t0, x0, b);
      CHECK(std::abs(e.eval(t0, x0) - want) < 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("catalog potentials round-trip through the formatter", "[parse]") {
  for (const auto& c : case_catalog())
    for (const auto& p : grid_gammas()) {
      if (!c.applies(p)) continue;
      for (const auto& b : grid_instances(c, p)) {
        const Expr e = c.potential(p, b).v;
        INFO(c.id << ": " << e.str());
        CHECK(parse(e.str()) == e);
      }
    }
}

TEST_CASE("parse errors carry offsets", "[parse]") {
  try {
    parse("x + * 2");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(parse("foo(x)"), ParseError);
  try {
    parse("x + nu");
    FAIL("no error");
  } catch (const UnknownIdentifier& e) {
    CHECK(e.identifier == "nu");
  }
}

TEST_CASE("exact rationals only", "[parse]") {
  CHECK(parse_exact_rational("-3/4") == Rational(-3, 4));
  CHECK(parse_exact_rational("6/4") == Rational(3, 2));
  CHECK(parse_exact_rational("7") == 7);
  CHECK_THROWS(parse_exact_rational("0.5"));
  CHECK_THROWS(parse_exact_rational("1/0"));
  CHECK_THROWS(parse_exact_rational("1e3"));
}
