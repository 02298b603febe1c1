#include <catch_amalgamated.hpp>

#include "nlsgc/invariance.hpp"

using namespace nlsgc;

namespace {

const SamplePlan& plan() {
  static const SamplePlan p = make_plan(PlanOptions{});
  return p;
}

Potential pot(const std::string& s, const ModelParams& p) { return Potential(parse(s, make_bindings(p))); }

// Classifying condition with V_t, V_x and xi derivatives by central differences.
std::complex<double> numeric_residual(const ModelParams& p, const Expr& V, const VectorField& q, double t, double x) {
  const double h = 1e-4;
  auto d = [&](const Expr& f, int order) {
    switch (order) {
      case 1: return (f.eval(t + h) - f.eval(t - h)) / (2 * h);
      case 2: return (f.eval(t + h) - 2.0 * f.eval(t) + f.eval(t - h)) / (h * h);
      default: return (f.eval(t + 2 * h) - 2.0 * f.eval(t + h) + 2.0 * f.eval(t - h) - f.eval(t - 2 * h)) / (2 * h * h * h);
    }
  };
  const auto Vt = (V.eval(t + h, x) - V.eval(t - h, x)) / (2 * h);
  const auto Vx = (V.eval(t, x + h) - V.eval(t, x - h)) / (2 * h);
  const auto xi = q.xi.eval(t), xit = d(q.xi, 1), xitt = d(q.xi, 2), xittt = d(q.xi, 3);
  const auto lhs = xi * Vt + (0.5 * xit * x + q.chi.eval(t)) * Vx + xit * V.eval(t, x);
  const auto rhs = xittt * x * x / 8.0 + 0.5 * d(q.chi, 2) * x + d(q.lam, 1) +
                   std::complex<double>(0, to_double(p.gamma_hat) / 4) * xitt;
  return lhs - rhs;
}

}  // namespace

TEST_CASE("classifying residual matches finite differences", "[invariance]") {
  const ModelParams p(Rational(3));
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"x^2+i*t*x", "D:t^2+1+G:exp(t)+M:t^3"},
      {"exp(-t)*x^(-2)+sin(t)", "D:exp(4*t)+G:t^2"},
      {"i/(t^2+2)+x^4", "D:tan(t)+G:cos(2*t)+M:t"},
  };
  for (const auto& [v, f] : cases) {
    const Potential V = pot(v, p);
    const VectorField q = parse_field(f);
    const Expr r = classifying_residual(p, V, q);
    for (auto [t0, x0] : {std::pair{0.3, 0.8}, std::pair{-0.7, 1.4}, std::pair{0.9, -0.6}}) {
      INFO(v << " / " << f << " at " << t0 << ", " << x0);
      const auto want = numeric_residual(p, V.v, q, t0, x0);
      CHECK(std::abs(r.eval(t0, x0) - want) < 1e-4 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("free equation symmetries", "[invariance]") {
  const ModelParams g2(Rational(2)), g4(Rational(4));
  const Potential zero(Expr(0));
  for (const char* f : {"M:1", "D:1", "D:t", "G:1", "G:t"}) {
    CHECK(is_symmetry(g2, zero, parse_field(f), plan()).holds);
    CHECK(is_symmetry(g4, zero, parse_field(f), plan()).holds);
  }
  CHECK(is_symmetry(g4, zero, parse_field("D:t^2"), plan()).holds);
}

TEST_CASE("negative controls produce witnesses", "[invariance]") {
  const ModelParams g2(Rational(2));
  const SymmetryVerdict a = is_symmetry(g2, Potential(Expr(0)), parse_field("D:t^2"), plan());
  CHECK_FALSE(a.holds);
  REQUIRE(a.test.witness.has_value());
  // lhs - rhs = -i*gh/2
  CHECK(a.residual == Expr(CRational(0, Rational(-1, 2))));

  const Potential V = pot("x^2+i*gh", g2);
  const VectorField q = parse_field("D:exp(-4*t)");
  const SymmetryVerdict b = is_symmetry(g2, V, q, plan());
  CHECK_FALSE(b.holds);
  REQUIRE(b.test.witness.has_value());
  const auto [tw, xw] = *b.test.witness;
  CHECK(std::abs(numeric_residual(g2, V.v, q, tw, xw)) > 1e-3);
  CHECK(is_symmetry(g2, V, parse_field("D:exp(4*t)"), plan()).holds);
}

TEST_CASE("solver dimensions", "[invariance]") {
  struct Row {
    Rational gamma;
    std::string V;
    std::size_t dim;
  };
  const std::vector<Row> rows = {
      {4, "0", 6}, {2, "0", 5}, {4, "x^2", 6}, {2, "x^2+i*gh", 5}, {4, "(1+i)*x^(-2)", 4}, {2, "(1+i)*x^(-2)", 3},
      {2, "x", 5}, {3, "i*exp(t)", 3}, {2, "x^4", 2},
  };
  for (const auto& r : rows) {
    const ModelParams p(r.gamma);
    const Potential V = pot(r.V, p);
    const SolveReport s = solve_symmetries(p, V, AnsatzSpace::rich(), make_plan(PlanOptions{}, {V.v}));
    INFO("gamma=" << to_string(r.gamma) << " V=" << r.V);
    CHECK(s.dimension == r.dim);
    CHECK(s.gap > 1e4);
    CHECK(s.verified);
    CHECK_FALSE(s.snap_failure);
    for (const auto& q : s.basis) CHECK(is_symmetry(p, V, q, plan()).holds);
  }
}

TEST_CASE("custom ansatz", "[invariance]") {
  const ModelParams p(Rational(4));
  const AnsatzSpace a = AnsatzSpace::parse_spec("xi: 1, t, t^2; lam: 1");
  CHECK(a.size() == 4);
  const SolveReport s = solve_symmetries(p, Potential(Expr(0)), a, plan());
  CHECK(s.dimension == 4);
  CHECK_THROWS_AS(AnsatzSpace::parse_spec("eta: 1"), ParseError);
  CHECK_THROWS_AS(AnsatzSpace::parse_spec("xi: x"), ParseError);
}
