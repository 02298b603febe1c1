#include <catch_amalgamated.hpp>

#include "nlsgc/rational.hpp"

using namespace nlsgc;

TEST_CASE("exact square roots", "[rational]") {
  CHECK(exact_sqrt(Rational(9, 4)) == Rational(3, 2));
  CHECK_FALSE(exact_sqrt(Rational(2)).has_value());
  CHECK_FALSE(exact_sqrt(Rational(-4)).has_value());
  CHECK(exact_sqrt(Rational(0)) == Rational(0));
}

TEST_CASE("square extraction keeps the squarefree part", "[rational]") {
  // 12/5 = (2/5)^2 * 15
  const auto [outside, inside] = extract_square(Rational(12, 5));
  CHECK(outside * outside * inside == Rational(12, 5));
  CHECK(inside == 15);
}

TEST_CASE("snapping recovers small fractions", "[rational]") {
  CHECK(snap_rational(1.0 / 3.0) == Rational(1, 3));
  CHECK(snap_rational(-7.0 / 4.0) == Rational(-7, 4));
  CHECK_FALSE(snap_rational(3.14159265358979).has_value());
}

TEST_CASE("complex rationals", "[rational]") {
  const CRational i = CRational::I();
  CHECK(i * i == CRational(-1));
  CHECK(pow_int(CRational(1, 1), 4) == CRational(-4));
  CHECK(to_string(CRational(Rational(1, 2), Rational(-3))) == "(1/2-3*i)");
  CHECK(pow_int(Rational(2, 3), -2) == Rational(9, 4));
}
