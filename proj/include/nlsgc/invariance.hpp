#pragma once

/// Classifying condition for Q = D(xi) + G(chi) + lambda M:
///
///   xi V_t + (xi_t x / 2 + chi) V_x + xi_t V
///     = xi_ttt x^2 / 8 + chi_tt x / 2 + lambda_t + i (gh/4) xi_tt,   gh = (4 - gamma)/gamma
///
/// and a finite-ansatz solver for the symmetry algebra of a fixed V.

#include "nlsgc/expr.hpp"
#include "nlsgc/liealg.hpp"
#include "nlsgc/parse.hpp"
#include "nlsgc/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsgc {

struct ModelParams {
  Rational gamma{2};
  Rational gamma_hat{1};

  ModelParams() = default;
  explicit ModelParams(const Rational& g) : gamma(g) {
    if (g == 0) throw std::invalid_argument("gamma must be nonzero");
    gamma_hat = (4 - g) / g;
  }
  static ModelParams from_gamma(std::int64_t num, std::int64_t den = 1) { return ModelParams(make_rational(num, den)); }

  bool critical() const { return gamma_hat == 0; }
  Expr gh() const { return Expr(gamma_hat); }
  friend bool operator==(const ModelParams& a, const ModelParams& b) { return a.gamma == b.gamma; }
};

struct Potential {
  Expr v;
  std::map<std::string, Rational> params;

  Potential() = default;
  Potential(Expr v_) : v(std::move(v_)) {}  // NOLINT(implicit)
  Potential(Expr v_, std::map<std::string, Rational> p) : v(std::move(v_)), params(std::move(p)) {}
};

/// Bindings for the parser: the given rationals plus gh (and its alias gamma_hat) for p.
inline Bindings make_bindings(const ModelParams& p, const std::map<std::string, Rational>& params = {}) {
  Bindings b;
  b["gh"] = p.gh();
  b["gamma_hat"] = p.gh();
  b["gamma"] = Expr(p.gamma);
  for (const auto& [k, v] : params) b[k] = Expr(v);
  return b;
}

inline Expr classifying_residual(const ModelParams& p, const Potential& V, const VectorField& q) {
  const Expr x = Expr::x();
  const Expr xi_t = q.xi.diff(Var::t);
  const Expr xi_tt = xi_t.diff(Var::t);
  const Expr xi_ttt = xi_tt.diff(Var::t);
  const Expr& v = V.v;
  const Expr lhs = q.xi * v.diff(Var::t) + (constant(1, 2) * xi_t * x + q.chi) * v.diff(Var::x) + xi_t * v;
  const Expr rhs = constant(1, 8) * xi_ttt * x * x + constant(1, 2) * q.chi.diff(Var::t).diff(Var::t) * x +
                   q.lam.diff(Var::t) + Expr::i() * Expr(p.gamma_hat / 4) * xi_tt;
  return lhs - rhs;
}

struct SymmetryVerdict {
  bool holds = false;
  ZeroTest test;
  Expr residual;
  Grade grade() const { return test.grade(); }
};

inline SymmetryVerdict is_symmetry(const ModelParams& p, const Potential& V, const VectorField& q,
                                   const SamplePlan& plan) {
  SymmetryVerdict out;
  out.residual = classifying_residual(p, V, q);
  out.test = is_zero(out.residual, plan);
  out.holds = out.test.zero();
  return out;
}

struct AnsatzSpace {
  std::vector<Expr> xi_basis;
  std::vector<Expr> chi_basis;
  std::vector<Expr> lam_basis;

  std::size_t size() const { return xi_basis.size() + chi_basis.size() + lam_basis.size(); }

  VectorField generator(std::size_t k) const {
    if (k < xi_basis.size()) return VectorField::D(xi_basis[k]);
    k -= xi_basis.size();
    if (k < chi_basis.size()) return VectorField::G(chi_basis[k]);
    k -= chi_basis.size();
    return VectorField::M(lam_basis.at(k));
  }

  /// Polynomials through degree 3 (4 for lambda), e^{+-4t}, cos/sin 4t for xi and
  /// e^{+-2t}, cos/sin 2t for chi.
  static AnsatzSpace rich() {
    AnsatzSpace a;
    const Expr t = Expr::t();
    for (int k = 0; k <= 3; ++k) a.xi_basis.push_back(t.pow(k));
    a.xi_basis.push_back(exp(4 * t));
    a.xi_basis.push_back(exp(-4 * t));
    a.xi_basis.push_back(cos(4 * t));
    a.xi_basis.push_back(sin(4 * t));
    for (int k = 0; k <= 3; ++k) a.chi_basis.push_back(t.pow(k));
    a.chi_basis.push_back(exp(2 * t));
    a.chi_basis.push_back(exp(-2 * t));
    a.chi_basis.push_back(cos(2 * t));
    a.chi_basis.push_back(sin(2 * t));
    for (int k = 0; k <= 4; ++k) a.lam_basis.push_back(t.pow(k));
    return a;
  }

  /// "xi:1,t,t^2;chi:1,t;lam:1" (sections optional, in any order).
  static AnsatzSpace parse_spec(std::string_view spec, const Bindings& b = {}) {
    AnsatzSpace a;
    std::string s(spec);
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const std::size_t semi = std::min(s.find(';', pos), s.size());
      std::string section = s.substr(pos, semi - pos);
      pos = semi + 1;
      const auto l = section.find_first_not_of(" \t");
      if (l == std::string::npos) continue;
      section = section.substr(l);
      const std::size_t colon = section.find(':');
      if (colon == std::string::npos) throw ParseError("ansatz section needs 'name:'", semi);
      std::string name = section.substr(0, colon);
      name.erase(name.find_last_not_of(" \t") + 1);
      std::vector<Expr>* dst = name == "xi" ? &a.xi_basis : name == "chi" ? &a.chi_basis
                               : name == "lam" ? &a.lam_basis : nullptr;
      if (!dst) throw ParseError("unknown ansatz section '" + name + "'", semi);
      std::string body = section.substr(colon + 1);
      std::size_t q = 0;
      while (q <= body.size()) {
        const std::size_t comma = std::min(body.find(',', q), body.size());
        const std::string item = body.substr(q, comma - q);
        if (item.find_first_not_of(" \t") != std::string::npos) {
          Expr e = parse(item, b);
          if (e.depends_on(Var::x)) throw ParseError("ansatz functions must not depend on x", q);
          dst->push_back(e);
        }
        q = comma + 1;
      }
    }
    return a;
  }
};

struct SolveReport {
  std::vector<VectorField> basis;
  std::size_t dimension = 0;
  std::vector<double> singular_values;
  double gap = std::numeric_limits<double>::infinity();
  bool snap_failure = false;
  bool laurent_rows = false;
  std::size_t rows = 0;
  std::size_t unknowns = 0;
  bool verified = false;        // every returned field passes is_symmetry
  double max_residual = 0.0;    // worst is_symmetry residual over the returned basis
};

struct SnapFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Rational exact_from_double(double v, bool& snapped) {
  if (auto r = snap_rational(v, 64, 1e-6)) {
    snapped = true;
    return *r;
  }
  snapped = false;
  if (auto r = snap_rational(v, 1000000000L, 1e-15)) return *r;
  // dyadic value of the double
  int e = 0;
  const double m = std::frexp(v, &e);
  const auto mant = static_cast<long long>(std::ldexp(m, 53));
  Rational out{Integer(mant)};
  const int shift = e - 53;
  if (shift >= 0) out *= pow_int(Rational(2), shift);
  else out /= pow_int(Rational(2), -shift);
  return out;
}

/// Reduced row echelon form in place; returns pivot columns.
inline std::vector<Eigen::Index> rref(Eigen::MatrixXd& m, double tol = 1e-9) {
  std::vector<Eigen::Index> pivots;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < m.cols() && row < m.rows(); ++col) {
    Eigen::Index best = row;
    for (Eigen::Index r = row + 1; r < m.rows(); ++r)
      if (std::abs(m(r, col)) > std::abs(m(best, col))) best = r;
    if (std::abs(m(best, col)) < tol) continue;
    m.row(row).swap(m.row(best));
    const double piv = m(row, col);
    m.row(row) /= piv;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double f = m(r, col);
      if (r != row && f != 0.0) m.row(r) -= f * m.row(row);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace detail

/// Null space of the classifying condition restricted to the ansatz span. Rows
/// come from x-Laurent coefficients at sampled t when every residual is Laurent
/// in x, and from (t, x) plan points otherwise; each row contributes its real
/// and imaginary part.
inline SolveReport solve_symmetries(const ModelParams& p, const Potential& V, const AnsatzSpace& a,
                                    const SamplePlan& plan) {
  SolveReport rep;
  const std::size_t n = a.size();
  rep.unknowns = n;
  if (n == 0) return rep;
  std::vector<Expr> cols;
  cols.reserve(n);
  for (std::size_t k = 0; k < n; ++k) cols.push_back(classifying_residual(p, V, a.generator(k)));

  std::vector<std::map<long, Expr>> laurent;
  std::set<long> powers;
  rep.laurent_rows = true;
  try {
    for (const auto& c : cols) {
      laurent.push_back(x_laurent_decompose(c));
      for (const auto& [k, _] : laurent.back()) powers.insert(k);
    }
  } catch (const NotLaurentInX&) {
    rep.laurent_rows = false;
  }

  std::vector<Exclusion> sing = singularities(V.v);
  for (const auto& c : cols)
    for (const auto& s : singularities(c)) sing.push_back(s);
  auto excluded = [&](double t, double x) {
    for (const auto& s : sing)
      if (std::abs((s.var == Var::t ? t : x) - s.location) < s.radius) return true;
    return plan.excludes(t, x);
  };
  auto t_excluded = [&](double t) {
    for (const std::vector<Exclusion>* list : std::initializer_list<const std::vector<Exclusion>*>{&sing, &plan.excluded})
      for (const auto& e : *list)
        if (e.var == Var::t && std::abs(t - e.location) < e.radius) return true;
    return false;
  };

  std::vector<std::vector<double>> rows;
  const std::size_t t_wanted = std::max<std::size_t>(3 * n, 40);
  std::size_t used = 0;
  for (std::size_t s = 0; s < plan.size(); ++s) {
    const double t = plan.t_samples[s], x = plan.x_samples[s];
    // Laurent rows are evaluated per t only, so only t-exclusions apply
    if (rep.laurent_rows ? t_excluded(t) : excluded(t, x)) continue;
    try {
      if (rep.laurent_rows) {
        std::vector<std::vector<double>> block;
        for (long pw : powers) {
          std::vector<double> re(n), im(n);
          for (std::size_t k = 0; k < n; ++k) {
            auto it = laurent[k].find(pw);
            const std::complex<double> v = it == laurent[k].end() ? 0.0 : it->second.eval(t, 0.0);
            re[k] = v.real();
            im[k] = v.imag();
          }
          block.push_back(std::move(re));
          block.push_back(std::move(im));
        }
        for (auto& r : block) rows.push_back(std::move(r));
      } else {
        std::vector<double> re(n), im(n);
        for (std::size_t k = 0; k < n; ++k) {
          const std::complex<double> v = cols[k].eval(t, x);
          re[k] = v.real();
          im[k] = v.imag();
        }
        rows.push_back(std::move(re));
        rows.push_back(std::move(im));
      }
    } catch (const SingularityError&) {
      continue;
    }
    ++used;
    if (rep.laurent_rows && used >= t_wanted) break;
  }

  // drop all-zero rows, equilibrate the rest
  std::vector<std::vector<double>> kept;
  for (auto& r : rows) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    if (!std::isfinite(m)) continue;
    if (m == 0.0) continue;
    for (double& v : r) v /= m;
    kept.push_back(std::move(r));
  }
  rep.rows = kept.size();
  const auto N = static_cast<Eigen::Index>(n);
  // pad with zero rows so the SVD always has at least n rows
  const auto R = static_cast<Eigen::Index>(std::max(kept.size(), n));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(R, N);
  for (std::size_t r = 0; r < kept.size(); ++r)
    for (std::size_t k = 0; k < n; ++k) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = kept[r][k];
  Eigen::VectorXd norms(N);
  for (Eigen::Index k = 0; k < N; ++k) norms(k) = A.col(k).norm();
  const double big = N ? norms.maxCoeff() : 0.0;
  for (Eigen::Index k = 0; k < N; ++k) {
    // rounding-level columns are exact zeros; normalizing them would fake rank
    if (norms(k) <= 1e-12 * big) {
      A.col(k).setZero();
      norms(k) = 1.0;
    }
    A.col(k) /= norms(k);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() ? sv(0) : 0.0;
  const double cutoff = 1e-8 * smax;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  const Eigen::Index nullity = N - rank;
  rep.dimension = static_cast<std::size_t>(nullity);
  if (rank > 0 && nullity > 0) {
    const double eps = std::numeric_limits<double>::epsilon() * smax;
    rep.gap = sv(rank - 1) / std::max(sv(rank), eps);
  }
  if (nullity == 0) {
    rep.verified = true;
    return rep;
  }

  Eigen::MatrixXd nullb = svd.matrixV().rightCols(nullity).transpose();  // nullity x N
  for (Eigen::Index k = 0; k < N; ++k) nullb.col(k) /= norms(k);
  detail::rref(nullb, 1e-7);

  for (Eigen::Index r = 0; r < nullity; ++r) {
    VectorField q;
    for (Eigen::Index k = 0; k < N; ++k) {
      double c = nullb(r, k);
      if (std::abs(c) < 1e-9) continue;
      bool snapped = false;
      const Rational exact = detail::exact_from_double(c, snapped);
      if (!snapped) rep.snap_failure = true;
      q = q + Expr(exact) * a.generator(static_cast<std::size_t>(k));
    }
    rep.basis.push_back(q);
  }
  rep.verified = true;
  for (const auto& q : rep.basis) {
    const auto v = is_symmetry(p, V, q, plan);
    rep.max_residual = std::max(rep.max_residual, v.test.max_residual);
    if (!v.holds) rep.verified = false;
  }
  return rep;
}

}  // namespace nlsgc
