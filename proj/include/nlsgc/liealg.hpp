#pragma once

/// The algebra spanned by D(xi), G(chi), lambda*M with xi, chi, lambda functions of t.
///
/// Brackets use the closed multiplication table
///   [D(a),D(b)] = D(a b_t - b a_t)
///   [D(a),G(c)] = G(a c_t - a_t c / 2)
///   [D(a),l M]  = a l_t M
///   [G(c),G(d)] = (c d_t - d c_t) / 2 M
/// and are never expanded in (t, x, psi) coordinates.

#include "nlsgc/expr.hpp"
#include "nlsgc/parse.hpp"
#include "nlsgc/sampling.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsgc {

struct InvalidField : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RankDeficientSampling : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VectorField {
  Expr xi;
  Expr chi;
  Expr lam;

  VectorField() = default;
  VectorField(Expr xi_, Expr chi_, Expr lam_) : xi(std::move(xi_)), chi(std::move(chi_)), lam(std::move(lam_)) {
    if (xi.depends_on(Var::x) || chi.depends_on(Var::x) || lam.depends_on(Var::x))
      throw InvalidField("vector field components must not depend on x");
  }

  static VectorField D(const Expr& xi) { return {xi, 0, 0}; }
  static VectorField G(const Expr& chi) { return {0, chi, 0}; }
  static VectorField M(const Expr& lam = 1) { return {0, 0, lam}; }

  bool is_zero() const { return xi.is_zero() && chi.is_zero() && lam.is_zero(); }

  friend VectorField operator+(const VectorField& a, const VectorField& b) {
    return {a.xi + b.xi, a.chi + b.chi, a.lam + b.lam};
  }
  friend VectorField operator-(const VectorField& a, const VectorField& b) {
    return {a.xi - b.xi, a.chi - b.chi, a.lam - b.lam};
  }
  friend VectorField operator*(const Expr& c, const VectorField& a) { return {c * a.xi, c * a.chi, c * a.lam}; }
  friend bool operator==(const VectorField& a, const VectorField& b) {
    return a.xi == b.xi && a.chi == b.chi && a.lam == b.lam;
  }
  friend bool operator!=(const VectorField& a, const VectorField& b) { return !(a == b); }

  /// "D:<xi>+G:<chi>+M:<lam>", zero components omitted; the zero field prints as "0".
  std::string str() const {
    std::string out;
    auto part = [&](const char* tag, const Expr& e) {
      if (e.is_zero()) return;
      if (!out.empty()) out += "+";
      out += tag;
      out += e.str();
    };
    part("D:", xi);
    part("G:", chi);
    part("M:", lam);
    return out.empty() ? "0" : out;
  }
};

inline std::ostream& operator<<(std::ostream& os, const VectorField& q) { return os << q.str(); }

/// Parses "D:<e>+G:<e>+M:<e>" (any subset, any order, each tag at most once) or "0".
inline VectorField parse_field(std::string_view text, const Bindings& b = {}) {
  std::string s(text);
  auto trimmed = [](std::string v) {
    const auto l = v.find_first_not_of(" \t");
    const auto r = v.find_last_not_of(" \t");
    return l == std::string::npos ? std::string() : v.substr(l, r - l + 1);
  };
  if (trimmed(s) == "0") return {};
  // tag positions at paren depth 0: start of string or after '+'
  std::vector<std::pair<char, std::size_t>> tags;
  int depth = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const char c = s[k];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth != 0 || !(c == 'D' || c == 'G' || c == 'M')) continue;
    std::size_t j = k + 1;
    while (j < s.size() && s[j] == ' ') ++j;
    if (j >= s.size() || s[j] != ':') continue;
    std::size_t p = k;
    while (p > 0 && s[p - 1] == ' ') --p;
    if (p != 0 && s[p - 1] != '+') continue;
    tags.emplace_back(c, k);
  }
  if (tags.empty() || trimmed(s.substr(0, tags.front().second)) != "")
    throw ParseError("vector field must start with D:, G: or M:", 0);
  Expr comp[3];
  bool seen[3] = {false, false, false};
  for (std::size_t n = 0; n < tags.size(); ++n) {
    const std::size_t begin = s.find(':', tags[n].second) + 1;
    std::size_t end = n + 1 < tags.size() ? tags[n + 1].second : s.size();
    if (n + 1 < tags.size()) end = s.rfind('+', end);
    const int slot = tags[n].first == 'D' ? 0 : tags[n].first == 'G' ? 1 : 2;
    if (seen[slot]) throw ParseError(std::string("duplicate component ") + tags[n].first, tags[n].second);
    seen[slot] = true;
    try {
      comp[slot] = parse(s.substr(begin, end - begin), b);
    } catch (const UnknownIdentifier& e) {
      throw UnknownIdentifier(e.identifier, begin + e.offset);
    } catch (const ParseError& e) {
      throw ParseError(std::string("in component ") + tags[n].first, begin + e.offset);
    }
  }
  return VectorField(comp[0], comp[1], comp[2]);
}

inline VectorField bracket(const VectorField& a, const VectorField& b) {
  const Expr a_xi_t = a.xi.diff(Var::t), b_xi_t = b.xi.diff(Var::t);
  const Expr a_chi_t = a.chi.diff(Var::t), b_chi_t = b.chi.diff(Var::t);
  const Expr half = constant(1, 2);
  Expr xi = a.xi * b_xi_t - b.xi * a_xi_t;
  Expr chi = a.xi * b_chi_t - half * a_xi_t * b.chi - b.xi * a_chi_t + half * b_xi_t * a.chi;
  Expr lam = a.xi * b.lam.diff(Var::t) - b.xi * a.lam.diff(Var::t) + half * (a.chi * b_chi_t - b.chi * a_chi_t);
  return {xi, chi, lam};
}

enum class Reflection { Ix, It };

inline VectorField adjoint_reflection(const VectorField& q, Reflection which) {
  if (which == Reflection::Ix) return {q.xi, -q.chi, q.lam};
  const Expr mt = -Expr::t();
  return {-q.xi.subs_t(mt), q.chi.subs_t(mt), -q.lam.subs_t(mt)};
}

enum class OneDimClass { Dclass, Gclass, tMclass, Mclass, Zero };

inline const char* to_string(OneDimClass c) {
  switch (c) {
    case OneDimClass::Dclass: return "Dclass";
    case OneDimClass::Gclass: return "Gclass";
    case OneDimClass::tMclass: return "tMclass";
    case OneDimClass::Mclass: return "Mclass";
    case OneDimClass::Zero: return "Zero";
  }
  return "?";
}

struct NormalForm {
  OneDimClass cls = OneDimClass::Zero;
  Grade grade = Grade::Proved;
};

/// Representative of <q> among <d_t>, <d_x>, <tM>, <M> (or the zero field).
inline NormalForm onedim_normal_form(const VectorField& q, const SamplePlan& plan) {
  NormalForm out;
  auto nonzero = [&](const Expr& e) {
    const ZeroTest z = is_zero(e, plan);
    if (z.grade() == Grade::Probable) out.grade = Grade::Probable;
    return !z.zero();
  };
  if (nonzero(q.xi)) out.cls = OneDimClass::Dclass;
  else if (nonzero(q.chi)) out.cls = OneDimClass::Gclass;
  else if (nonzero(q.lam.diff(Var::t))) out.cls = OneDimClass::tMclass;
  else if (nonzero(q.lam)) out.cls = OneDimClass::Mclass;
  else out.cls = OneDimClass::Zero;
  return out;
}

struct StructureReport {
  std::vector<VectorField> basis;
  // constants[i][j][k]: [q_i, q_j] = sum_k c^k_ij q_k
  std::vector<std::vector<std::vector<std::complex<double>>>> constants;
  double max_residual = 0.0;
  double condition_number = 0.0;
  double tolerance = 0.0;
  std::size_t sample_count = 0;
  bool closed = false;
};

namespace detail {

inline std::vector<double> structure_samples(const std::vector<VectorField>& basis, const SamplePlan& plan) {
  const std::size_t want = 4 * basis.size();
  std::vector<double> ts;
  for (std::size_t k = 0; k < plan.size() && ts.size() < want; ++k) {
    const double t = plan.t_samples[k];
    bool ok = true;
    for (const auto& e : plan.excluded)
      if (e.var == Var::t && std::abs(t - e.location) < e.radius) ok = false;
    if (!ok) continue;
    try {
      for (const auto& q : basis) {
        (void)q.xi.eval(t);
        (void)q.chi.eval(t);
        (void)q.lam.eval(t);
      }
    } catch (const SingularityError&) {
      continue;
    }
    ts.push_back(t);
  }
  return ts;
}

inline void fill_column(Eigen::Ref<Eigen::VectorXcd> col, const VectorField& q, const std::vector<double>& ts) {
  const std::size_t n = ts.size();
  for (std::size_t r = 0; r < n; ++r) {
    col(static_cast<Eigen::Index>(r)) = q.xi.eval(ts[r]);
    col(static_cast<Eigen::Index>(n + r)) = q.chi.eval(ts[r]);
    col(static_cast<Eigen::Index>(2 * n + r)) = q.lam.eval(ts[r]);
  }
}

}  // namespace detail

/// Fits [q_i, q_j] = sum_k c^k_ij q_k by least squares on sampled components
/// at 4*|basis| values of t taken from the plan.
inline StructureReport verify_structure_constants(const std::vector<VectorField>& basis, const SamplePlan& plan) {
  if (basis.empty()) throw std::invalid_argument("empty basis");
  StructureReport rep;
  rep.basis = basis;
  rep.tolerance = plan.tolerance < 1e-8 ? 1e-8 : plan.tolerance;
  const auto ts = detail::structure_samples(basis, plan);
  rep.sample_count = ts.size();
  const auto n = static_cast<Eigen::Index>(basis.size());
  const auto rows = static_cast<Eigen::Index>(3 * ts.size());
  if (ts.size() < basis.size()) throw RankDeficientSampling("not enough admissible sample points");
  Eigen::MatrixXcd A(rows, n);
  for (Eigen::Index k = 0; k < n; ++k) detail::fill_column(A.col(k), basis[static_cast<std::size_t>(k)], ts);

  // column scaling keeps the rank decision independent of component magnitudes
  Eigen::VectorXd norms(n);
  for (Eigen::Index k = 0; k < n; ++k) norms(k) = std::max(A.col(k).norm(), 1e-300);
  Eigen::MatrixXcd As = A * norms.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0), smin = sv(n - 1);
  if (!(smin > 1e-10 * smax)) throw RankDeficientSampling("sampled basis matrix is rank deficient; enlarge the plan");
  rep.condition_number = smax / smin;

  rep.constants.assign(basis.size(),
                       std::vector<std::vector<std::complex<double>>>(basis.size(),
                                                                      std::vector<std::complex<double>>(basis.size())));
  Eigen::VectorXcd rhs(rows);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      const VectorField br = bracket(basis[i], basis[j]);
      detail::fill_column(rhs, br, ts);
      const Eigen::VectorXcd c = norms.cwiseInverse().asDiagonal() * svd.solve(rhs);
      const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
      const double res = (A * c - rhs).cwiseAbs().maxCoeff() / scale;
      rep.max_residual = std::max(rep.max_residual, res);
      for (std::size_t k = 0; k < basis.size(); ++k) {
        rep.constants[i][j][k] = c(static_cast<Eigen::Index>(k));
        rep.constants[j][i][k] = -c(static_cast<Eigen::Index>(k));
      }
    }
  }
  rep.closed = rep.max_residual < rep.tolerance;
  return rep;
}

}  // namespace nlsgc
