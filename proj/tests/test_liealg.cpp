#include <catch_amalgamated.hpp>

#include "nlsgc/liealg.hpp"
#include "nlsgc/parse.hpp"

using namespace nlsgc;

namespace {

const Expr t = Expr::t(), x = Expr::x();

// Operator written out on (t, x) with fiber parts a*I + phi*M; I and M commute
// and have x-, t-dependent coefficients only, so the bracket reduces to the
// base vector field acting on coefficients.
struct Expanded {
  Expr dt, dx, a, phi;
};

Expanded expand(const VectorField& q, const Rational& gamma) {
  const Expr xt = q.xi.diff(Var::t);
  return {q.xi, constant(1, 2) * xt * x + q.chi, -Expr(1 / gamma) * xt,
          constant(1, 8) * xt.diff(Var::t) * x * x + constant(1, 2) * q.chi.diff(Var::t) * x + q.lam};
}

Expr apply(const Expanded& q, const Expr& f) { return q.dt * f.diff(Var::t) + q.dx * f.diff(Var::x); }

Expanded commutator(const Expanded& p, const Expanded& q) {
  return {apply(p, q.dt) - apply(q, p.dt), apply(p, q.dx) - apply(q, p.dx), apply(p, q.a) - apply(q, p.a),
          apply(p, q.phi) - apply(q, p.phi)};
}

bool same(const Expanded& a, const Expanded& b) {
  return a.dt == b.dt && a.dx == b.dx && a.a == b.a && a.phi == b.phi;
}

VectorField field(const std::string& s) { return parse_field(s); }

}  // namespace

TEST_CASE("brackets match the coordinate commutator", "[liealg]") {
  const std::vector<std::string> ops = {
      "D:1", "D:t", "D:t^2", "D:t^2+1", "D:exp(4*t)", "D:tan(2*t)",    "G:1",   "G:t",
      "G:exp(-2*t)", "G:sin(2*t)", "M:1", "M:t^3",   "D:2*t+G:3*t^2+M:t^3", "G:1+M:t",
  };
  const Rational gamma(3);
  for (const auto& a : ops)
    for (const auto& b : ops) {
      const VectorField qa = field(a), qb = field(b);
      INFO("[" << a << ", " << b << "]");
      CHECK(same(expand(bracket(qa, qb), gamma), commutator(expand(qa, gamma), expand(qb, gamma))));
    }
}

TEST_CASE("closed-form bracket table", "[liealg]") {
  CHECK(bracket(field("D:1"), field("G:t")) == field("G:1"));
  CHECK(bracket(field("G:1"), field("G:t")) == field("M:1/2"));
  CHECK(bracket(field("D:t"), field("G:1")) == field("G:-1/2"));
  CHECK(bracket(field("D:1"), field("M:t")) == field("M:1"));
  CHECK(bracket(field("G:t"), field("M:t^2")).is_zero());
}

TEST_CASE("antisymmetry and Jacobi", "[liealg]") {
  const VectorField a = field("D:t^2+G:t+M:1"), b = field("D:exp(2*t)+G:1"), c = field("G:t^2+M:t");
  CHECK((bracket(a, b) + bracket(b, a)).is_zero());
  const VectorField j = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b));
  const SamplePlan plan = make_plan(PlanOptions{});
  CHECK(is_zero(j.xi, plan).zero());
  CHECK(is_zero(j.chi, plan).zero());
  CHECK(is_zero(j.lam, plan).zero());
}

TEST_CASE("D(1), D(t), D(t^2) span sl(2,R)", "[liealg]") {
  const std::vector<VectorField> basis = {field("D:1"), field("D:t"), field("D:t^2")};
  const StructureReport rep = verify_structure_constants(basis, make_plan(PlanOptions{}));
  REQUIRE(rep.closed);
  CHECK(rep.max_residual < 1e-8);
  auto c = [&](int i, int j, int k) { return snap_rational(rep.constants[i][j][k].real()); };
  // [D1,Dt] = D1, [D1,Dt^2] = 2 Dt, [Dt,Dt^2] = Dt^2
  CHECK(c(0, 1, 0) == Rational(1));
  CHECK(c(0, 2, 1) == Rational(2));
  CHECK(c(1, 2, 2) == Rational(1));
  // e = D(1), h = -2 D(t), f = -D(t^2)
  const VectorField e = basis[0], h = Expr(-2) * basis[1], f = Expr(-1) * basis[2];
  CHECK(bracket(h, e) == Expr(2) * e);
  CHECK(bracket(h, f) == Expr(-2) * f);
  CHECK(bracket(e, f) == h);
}

TEST_CASE("non-closed span is reported", "[liealg]") {
  const StructureReport rep = verify_structure_constants({field("D:1"), field("D:t^2")}, make_plan(PlanOptions{}));
  CHECK_FALSE(rep.closed);
}

TEST_CASE("reflections act as automorphisms", "[liealg]") {
  const VectorField a = field("D:t^2+G:t"), b = field("G:exp(t)+M:t");
  for (Reflection r : {Reflection::Ix, Reflection::It})
    CHECK(adjoint_reflection(bracket(a, b), r) == bracket(adjoint_reflection(a, r), adjoint_reflection(b, r)));
}

TEST_CASE("one-dimensional normal forms", "[liealg]") {
  const SamplePlan plan = make_plan(PlanOptions{});
  CHECK(onedim_normal_form(field("D:t^2+1+G:t"), plan).cls == OneDimClass::Dclass);
  CHECK(onedim_normal_form(field("G:t+M:t"), plan).cls == OneDimClass::Gclass);
  CHECK(onedim_normal_form(field("M:t^2"), plan).cls == OneDimClass::tMclass);
  CHECK(onedim_normal_form(field("M:3"), plan).cls == OneDimClass::Mclass);
  CHECK(onedim_normal_form(VectorField{}, plan).cls == OneDimClass::Zero);
}

TEST_CASE("field syntax", "[liealg]") {
  CHECK(field("D:t+G:1+M:t^2").str() == "D:t+G:1+M:t^2");
  CHECK(field("D:exp(2*(t+1))").xi == exp(2 * t + 2));
  CHECK_THROWS_AS(field("G:x"), InvalidField);
  CHECK_THROWS(field("Q:1"));
}
