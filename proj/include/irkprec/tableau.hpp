#ifndef IRKPREC_TABLEAU_HPP
#define IRKPREC_TABLEAU_HPP

#include "irkprec/core.hpp"
#include "irkprec/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace irkprec {

enum class Family { Gauss, RadauIIA, LobattoIIIC, SDIRK2L, SDIRK3L, BackwardEuler };

inline constexpr std::array<Family, 6> kAllFamilies{Family::Gauss,       Family::RadauIIA,
                                                    Family::LobattoIIIC, Family::SDIRK2L,
                                                    Family::SDIRK3L,     Family::BackwardEuler};

inline std::string to_string(Family f) {
  switch (f) {
    case Family::Gauss: return "gauss";
    case Family::RadauIIA: return "radauIIA";
    case Family::LobattoIIIC: return "lobattoIIIC";
    case Family::SDIRK2L: return "sdirk2l";
    case Family::SDIRK3L: return "sdirk3l";
    case Family::BackwardEuler: return "backward-euler";
  }
  return "unknown";
}

/// Case-insensitive lookup of a family by its CLI name.
inline std::optional<Family> parse_family(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const std::string key = lower(name);
  for (Family f : kAllFamilies)
    if (lower(to_string(f)) == key) return f;
  if (key == "radau" || key == "radauiia") return Family::RadauIIA;
  if (key == "lobatto" || key == "lobattoiiic") return Family::LobattoIIIC;
  if (key == "be" || key == "backward_euler") return Family::BackwardEuler;
  return std::nullopt;
}

/// Inclusive stage range supported for a family.
inline std::pair<int, int> stage_range(Family f) {
  switch (f) {
    case Family::Gauss: return {1, 5};
    case Family::RadauIIA: return {1, 5};
    case Family::LobattoIIIC: return {2, 5};
    case Family::SDIRK2L: return {2, 2};
    case Family::SDIRK3L: return {3, 3};
    case Family::BackwardEuler: return {1, 1};
  }
  return {0, -1};
}

inline bool is_diagonally_implicit(Family f) {
  return f == Family::SDIRK2L || f == Family::SDIRK3L || f == Family::BackwardEuler;
}

struct ButcherTableau {
  Family family = Family::BackwardEuler;
  int s = 1;
  Matrix A0;
  Vector b0;
  Vector c0;
  int order = 1;

  std::string name() const { return to_string(family) + "-" + std::to_string(s); }
};

struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const ValidationCheck* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Checks the defining algebraic properties of a tableau. Never throws on a bad tableau;
/// failures show up as report entries.
inline ValidationReport validate_tableau(const ButcherTableau& t) {
  ValidationReport rep;
  const Index s = t.A0.rows();
  if (t.A0.cols() != s || t.b0.size() != s || t.c0.size() != s) {
    rep.checks.push_back({"shape", 1.0, 0.0, false});
    return rep;
  }

  const double row_res = (t.A0.rowwise().sum() - t.c0).cwiseAbs().maxCoeff();
  rep.checks.push_back({"row_sums", row_res, 1e-13, row_res <= 1e-13});

  const double sum_res = std::abs(t.b0.sum() - 1.0);
  rep.checks.push_back({"sum_b", sum_res, 1e-13, sum_res <= 1e-13});

  double order_res = 0.0;
  for (int k = 1; k <= t.order; ++k) {
    const double q = t.b0.dot(t.c0.array().pow(double(k - 1)).matrix());
    order_res = std::max(order_res, std::abs(q - 1.0 / k));
  }
  rep.checks.push_back({"order_B(" + std::to_string(t.order) + ")", order_res, 1e-12,
                        order_res <= 1e-12});

  Eigen::JacobiSVD<Matrix> svd(t.A0);
  const double smin = svd.singularValues().minCoeff();
  rep.checks.push_back({"invertible", smin, 1e-10, smin > 1e-10});

  // Assumption of positive real part for eig(A0^-1); equivalent to eig(A0) since
  // Re(1/z) = Re(z)/|z|^2.
  double min_re = std::numeric_limits<double>::infinity();
  if (smin > 1e-10) {
    Eigen::EigenSolver<Matrix> es(t.A0, false);
    if (es.info() == Eigen::Success) {
      for (Index i = 0; i < s; ++i) min_re = std::min(min_re, (1.0 / es.eigenvalues()[i]).real());
    } else {
      min_re = -1.0;
    }
  } else {
    min_re = 0.0;
  }
  rep.checks.push_back({"positive_real_spectrum", min_re, 0.0, min_re > 0.0});
  return rep;
}

namespace detail {

// Collocation coefficients a_ij = int_0^{c_i} l_j, b_j = int_0^1 l_j for the Lagrange basis
// on nodes c, integrated with an 8-point Gauss-Legendre rule (exact to degree 15).
inline void collocation_coefficients(const Vector& c, Matrix& A, Vector& b) {
  const Index s = c.size();
  const auto [qx, qw] = poly::gauss_legendre_rule(8);
  auto lagrange = [&](Index j, double x) {
    double v = 1.0;
    for (Index m = 0; m < s; ++m)
      if (m != j) v *= (x - c[m]) / (c[j] - c[m]);
    return v;
  };
  auto integrate = [&](Index j, double upper) {
    double acc = 0.0;
    for (Index q = 0; q < qx.size(); ++q) acc += qw[q] * lagrange(j, upper * qx[q]);
    return acc * upper;
  };
  A.resize(s, s);
  b.resize(s);
  for (Index j = 0; j < s; ++j) {
    b[j] = integrate(j, 1.0);
    for (Index i = 0; i < s; ++i) A(i, j) = integrate(j, c[i]);
  }
}

// Roots of P_s(2x-1) - P_{s-k}(2x-1), polished against the recurrence.
inline Vector jacobi_nodes(int s, int k) {
  Vector p = poly::shifted_legendre(s);
  Vector q = poly::shifted_legendre(s - k);
  p.head(q.size()) -= q;
  auto f = [s, k](double x) {
    const auto [ps, dps] = poly::legendre_with_derivative(s, 2.0 * x - 1.0);
    const auto [pq, dpq] = poly::legendre_with_derivative(s - k, 2.0 * x - 1.0);
    return std::pair{ps - pq, 2.0 * (dps - dpq)};
  };
  const auto roots = poly::polished_real_roots(p, f);
  Vector c(s);
  for (int i = 0; i < s; ++i) c[i] = roots[static_cast<std::size_t>(i)];
  return c;
}

inline Vector gauss_nodes(int s) {
  const auto roots = poly::polished_real_roots(poly::shifted_legendre(s), [s](double x) {
    const auto [v, d] = poly::legendre_with_derivative(s, 2.0 * x - 1.0);
    return std::pair{v, 2.0 * d};
  });
  Vector c(s);
  for (int i = 0; i < s; ++i) c[i] = roots[static_cast<std::size_t>(i)];
  return c;
}

// Lobatto IIIC: a_i1 = b_1 and C(s-1), one s x s linear system per row.
inline Matrix lobatto_iiic_matrix(const Vector& c, const Vector& b) {
  const Index s = c.size();
  Matrix V(s, s);
  V.row(0) = Eigen::RowVectorXd::Unit(s, 0);
  for (Index k = 1; k < s; ++k)
    for (Index j = 0; j < s; ++j) V(k, j) = std::pow(c[j], double(k - 1));
  const auto lu = V.fullPivLu();
  Matrix A(s, s);
  for (Index i = 0; i < s; ++i) {
    Vector rhs(s);
    rhs[0] = b[0];
    for (Index k = 1; k < s; ++k) rhs[k] = std::pow(c[i], double(k)) / double(k);
    A.row(i) = lu.solve(rhs).transpose();
  }
  return A;
}

inline double sdirk3l_gamma() {
  // Root of x^3 - 3x^2 + 3x/2 - 1/6 in (1/3, 1/2): L-stability of the 3-stage scheme.
  double x = 0.4358665215;
  for (int it = 0; it < 20; ++it) {
    const double f = ((x - 3.0) * x + 1.5) * x - 1.0 / 6.0;
    const double df = (3.0 * x - 6.0) * x + 1.5;
    x -= f / df;
  }
  return x;
}

}  // namespace detail

/// Builds the tableau for (family, s). Collocation families are computed from their
/// nodes; SDIRK baselines are fixed.
inline ButcherTableau build_tableau(Family family, int s) {
  const auto [lo, hi] = stage_range(family);
  if (s < lo || s > hi)
    throw UnsupportedScheme(to_string(family) + " with " + std::to_string(s) +
                            " stages (supported " + std::to_string(lo) + ".." +
                            std::to_string(hi) + ")");
  ButcherTableau t;
  t.family = family;
  t.s = s;
  switch (family) {
    case Family::Gauss:
      t.c0 = detail::gauss_nodes(s);
      detail::collocation_coefficients(t.c0, t.A0, t.b0);
      t.order = 2 * s;
      break;
    case Family::RadauIIA:
      t.c0 = detail::jacobi_nodes(s, 1);
      t.c0[s - 1] = 1.0;
      detail::collocation_coefficients(t.c0, t.A0, t.b0);
      t.order = 2 * s - 1;
      break;
    case Family::LobattoIIIC: {
      t.c0 = detail::jacobi_nodes(s, 2);
      t.c0[0] = 0.0;
      t.c0[s - 1] = 1.0;
      Matrix unused;
      detail::collocation_coefficients(t.c0, unused, t.b0);
      t.A0 = detail::lobatto_iiic_matrix(t.c0, t.b0);
      t.order = 2 * s - 2;
      break;
    }
    case Family::SDIRK2L: {
      const double g = (2.0 - std::sqrt(2.0)) / 2.0;
      t.A0.resize(2, 2);
      t.A0 << g, 0.0, 1.0 - g, g;
      t.b0.resize(2);
      t.b0 << 1.0 - g, g;
      t.c0.resize(2);
      t.c0 << g, 1.0;
      t.order = 2;
      break;
    }
    case Family::SDIRK3L: {
      const double g = detail::sdirk3l_gamma();
      const double b1 = -(6.0 * g * g - 16.0 * g + 1.0) / 4.0;
      const double b2 = (6.0 * g * g - 20.0 * g + 5.0) / 4.0;
      t.A0.resize(3, 3);
      t.A0 << g, 0.0, 0.0, (1.0 - g) / 2.0, g, 0.0, b1, b2, g;
      t.b0.resize(3);
      t.b0 << b1, b2, g;
      t.c0.resize(3);
      t.c0 << g, (1.0 + g) / 2.0, 1.0;
      t.order = 3;
      break;
    }
    case Family::BackwardEuler:
      t.A0 = Matrix::Ones(1, 1);
      t.b0 = Vector::Ones(1);
      t.c0 = Vector::Ones(1);
      t.order = 1;
      break;
  }
  const auto rep = validate_tableau(t);
  if (!rep.all_passed()) {
    std::string failed;
    for (const auto& c : rep.checks)
      if (!c.passed) failed += " " + c.name + "=" + std::to_string(c.residual);
    throw ConstructionFailure(t.name() + " failed validation:" + failed);
  }
  return t;
}

}  // namespace irkprec

#endif  // IRKPREC_TABLEAU_HPP
