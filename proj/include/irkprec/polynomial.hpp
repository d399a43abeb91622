#ifndef IRKPREC_POLYNOMIAL_HPP
#define IRKPREC_POLYNOMIAL_HPP

// Dense polynomials stored as ascending coefficient vectors, p(x) = sum_k p[k] x^k.

#include "irkprec/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace irkprec::poly {

inline Vector multiply(const Vector& p, const Vector& q) {
  Vector r = Vector::Zero(p.size() + q.size() - 1);
  for (Index i = 0; i < p.size(); ++i)
    for (Index j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

/// Horner evaluation.
template <typename T>
T evaluate(const Vector& p, T x) {
  T acc = T(0);
  for (Index k = p.size() - 1; k >= 0; --k) acc = acc * x + T(p[k]);
  return acc;
}

inline Vector derivative(const Vector& p) {
  if (p.size() <= 1) return Vector::Zero(1);
  Vector d(p.size() - 1);
  for (Index k = 1; k < p.size(); ++k) d[k - 1] = double(k) * p[k];
  return d;
}

/// Monic polynomial with the given complex roots; conjugate pairs give real coefficients.
inline Vector from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  Vector out(static_cast<Index>(c.size()));
  for (std::size_t k = 0; k < c.size(); ++k) out[static_cast<Index>(k)] = c[k].real();
  return out;
}

/// Shifted Legendre polynomial P_n(2x - 1) on [0, 1], ascending coefficients.
inline Vector shifted_legendre(int n) {
  Vector prev = Vector::Ones(1);
  if (n == 0) return prev;
  Vector cur(2);
  cur << -1.0, 2.0;
  Vector two_x_minus_one(2);
  two_x_minus_one << -1.0, 2.0;
  for (int k = 1; k < n; ++k) {
    Vector a = multiply(two_x_minus_one, cur) * double(2 * k + 1);
    Vector next = Vector::Zero(a.size());
    next.head(prev.size()) -= double(k) * prev;
    next += a;
    next /= double(k + 1);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Value and derivative of the Legendre polynomial P_n(t) on [-1, 1] by three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double t) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = t;
  double d0 = 0.0, d1 = 1.0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * t * p1 - k * p0) / (k + 1);
    const double d2 = d0 + (2 * k + 1) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

/// Roots of p from the eigenvalues of its companion matrix.
inline std::vector<std::complex<double>> companion_roots(const Vector& p) {
  Index deg = p.size() - 1;
  while (deg > 0 && p[deg] == 0.0) --deg;
  if (deg < 1) return {};
  Matrix comp = Matrix::Zero(deg, deg);
  for (Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (Index i = 0; i < deg; ++i) comp(i, deg - 1) = -p[i] / p[deg];
  Eigen::EigenSolver<Matrix> es(comp, false);
  if (es.info() != Eigen::Success) throw EigenFailure("companion matrix eigensolve failed");
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(deg));
  for (Index i = 0; i < deg; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
  return roots;
}

/// Real roots of p, polished with Newton iterations on `value_and_slope` and sorted ascending.
/// `value_and_slope(x)` returns {p(x), p'(x)} using whatever evaluation is most accurate.
template <typename F>
std::vector<double> polished_real_roots(const Vector& p, F&& value_and_slope) {
  std::vector<double> roots;
  for (const auto& z : companion_roots(p)) {
    double x = z.real();
    for (int it = 0; it < 50; ++it) {
      const auto [v, d] = value_and_slope(x);
      if (d == 0.0) break;
      const double step = v / d;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// n-point Gauss-Legendre rule mapped to [0, 1].
inline std::pair<Vector, Vector> gauss_legendre_rule(int n) {
  auto legendre = [n](double x) {
    auto [v, d] = legendre_with_derivative(n, 2.0 * x - 1.0);
    return std::pair{v, 2.0 * d};
  };
  const auto roots = polished_real_roots(shifted_legendre(n), legendre);
  Vector nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * roots[static_cast<std::size_t>(i)] - 1.0;
    const double dp = legendre_with_derivative(n, t).second;
    nodes[i] = roots[static_cast<std::size_t>(i)];
    weights[i] = 1.0 / ((1.0 - t * t) * dp * dp);  // 2/((1-t^2)P'^2), halved for [0,1]
  }
  return {nodes, weights};
}

}  // namespace irkprec::poly

#endif  // IRKPREC_POLYNOMIAL_HPP
