#pragma once

/// Exact rational and complex-rational scalars used as the constant field of
/// every symbolic expression.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace nlsgc {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw std::domain_error("zero denominator");
  return Rational(Integer(num), Integer(den));
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline bool is_integer(const Rational& q) {
  return boost::multiprecision::denominator(q) == 1;
}

inline std::string to_string(const Rational& q) {
  const Integer& n = boost::multiprecision::numerator(q);
  const Integer& d = boost::multiprecision::denominator(q);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

/// Integer power with a signed exponent.
inline Rational pow_int(const Rational& base, long e) {
  if (e < 0) {
    if (base == 0) throw std::domain_error("0 raised to a negative power");
    return pow_int(1 / base, -e);
  }
  Rational result = 1, b = base;
  while (e) {
    if (e & 1) result *= b;
    b *= b;
    e >>= 1;
  }
  return result;
}

/// Exact square root of a non-negative integer, if it is a perfect square.
inline std::optional<Integer> exact_isqrt(const Integer& n) {
  if (n < 0) return std::nullopt;
  Integer r = boost::multiprecision::sqrt(n);
  if (r * r == n) return r;
  return std::nullopt;
}

inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  auto n = exact_isqrt(boost::multiprecision::numerator(q));
  auto d = exact_isqrt(boost::multiprecision::denominator(q));
  if (!n || !d) return std::nullopt;
  return Rational(*n, *d);
}

/// Writes q = s^2 * r with r square-free over the primes below a small bound.
/// Returns {s, r}. Large prime-square factors may remain in r.
inline std::pair<Rational, Rational> extract_square(const Rational& q) {
  if (q <= 0) throw std::domain_error("extract_square expects a positive rational");
  // sqrt(n/d) = sqrt(n*d)/d
  Integer m = boost::multiprecision::numerator(q) * boost::multiprecision::denominator(q);
  Integer out = 1;
  if (auto r = exact_isqrt(m)) {
    return {Rational(*r, boost::multiprecision::denominator(q)), Rational(1)};
  }
  for (unsigned p = 2; p < 2000 && Integer(p) * p <= m; ++p) {
    const Integer pp = Integer(p) * p;
    while (m % pp == 0) {
      m /= pp;
      out *= p;
    }
  }
  return {Rational(out, boost::multiprecision::denominator(q)), Rational(m)};
}

/// Best rational approximation with bounded denominator (continued fractions).
/// Returns nullopt when the approximation error exceeds tol.
inline std::optional<Rational> snap_rational(double value, long max_den = 64, double tol = 1e-6) {
  if (!std::isfinite(value)) return std::nullopt;
  const double sign = value < 0 ? -1.0 : 1.0;
  double x = std::abs(value);
  // convergents h/k
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(frac);
    if (a_d > 1e15) break;
    const long long a = static_cast<long long>(a_d);
    const long long h2 = a * h1 + h0;
    const long long k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    const double rem = frac - a_d;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) < 1e-15 || rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  if (k1 == 0) return std::nullopt;
  const double approx = static_cast<double>(h1) / static_cast<double>(k1);
  if (std::abs(approx - x) > tol * std::max(1.0, x)) return std::nullopt;
  Rational r{Integer(h1), Integer(k1)};
  return sign < 0 ? Rational(-r) : r;
}

/// Complex number with exact rational real and imaginary parts.
struct CRational {
  Rational re{0};
  Rational im{0};

  CRational() = default;
  CRational(Rational r) : re(std::move(r)) {}  // NOLINT(implicit)
  CRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  CRational(int r) : re(r) {}  // NOLINT(implicit)

  static CRational I() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_one() const { return re == 1 && im == 0; }
  bool is_real() const { return im == 0; }

  std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }

  CRational conj() const { return {re, -im}; }

  friend CRational operator+(const CRational& a, const CRational& b) { return {a.re + b.re, a.im + b.im}; }
  friend CRational operator-(const CRational& a, const CRational& b) { return {a.re - b.re, a.im - b.im}; }
  friend CRational operator-(const CRational& a) { return {-a.re, -a.im}; }
  friend CRational operator*(const CRational& a, const CRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend CRational operator/(const CRational& a, const CRational& b) {
    const Rational n = b.re * b.re + b.im * b.im;
    if (n == 0) throw std::domain_error("division by zero constant");
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
  CRational& operator+=(const CRational& o) { return *this = *this + o; }
  CRational& operator*=(const CRational& o) { return *this = *this * o; }
  friend bool operator==(const CRational& a, const CRational& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const CRational& a, const CRational& b) { return !(a == b); }

  /// Total order: by real part, then imaginary part.
  friend int compare(const CRational& a, const CRational& b) {
    if (a.re != b.re) return a.re < b.re ? -1 : 1;
    if (a.im != b.im) return a.im < b.im ? -1 : 1;
    return 0;
  }

  /// Sign used for canonical orientation: real part decides, imaginary part breaks ties.
  bool is_negative() const { return re < 0 || (re == 0 && im < 0); }
};

inline CRational pow_int(const CRational& base, long e) {
  if (e < 0) return pow_int(CRational(1) / base, -e);
  CRational result(1), b = base;
  while (e) {
    if (e & 1) result = result * b;
    b = b * b;
    e >>= 1;
  }
  return result;
}

inline std::string to_string(const CRational& c) {
  auto imag = [](const Rational& v) {  // |v| i
    return v == 1 ? std::string("i") : to_string(v) + "*i";
  };
  if (c.im == 0) return to_string(c.re);
  if (c.re == 0) return c.im < 0 ? "-" + imag(-c.im) : imag(c.im);
  return "(" + to_string(c.re) + (c.im < 0 ? "-" : "+") + imag(abs(c.im)) + ")";
}

}  // namespace nlsgc
