#ifndef IRKPREC_SPECTRAL_HPP
#define IRKPREC_SPECTRAL_HPP

// Spectral structure of A0^-1: eigenvalue pairing, characteristic polynomial, the
// conjugate-pair factorization of the stage determinant and the polynomials R_i used to
// assemble the update right-hand side.

#include "irkprec/core.hpp"
#include "irkprec/polynomial.hpp"
#include "irkprec/tableau.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace irkprec {

/// One real eigenvalue (beta == 0) or one conjugate pair eta +- i beta of A0^-1.
struct EigenPair {
  double eta = 0.0;
  double beta = 0.0;
  double gamma_star = 0.0;   // sqrt(eta^2 + beta^2)
  double kappa_bound = 1.0;  // sqrt(1 + beta^2/eta^2)

  static EigenPair make(double eta, double beta) {
    EigenPair p;
    p.eta = eta;
    p.beta = beta;
    p.gamma_star = std::hypot(eta, beta);
    p.kappa_bound = beta == 0.0 ? 1.0 : p.gamma_star / eta;
    return p;
  }
  bool is_real() const { return beta == 0.0; }
};

struct SpectralData {
  std::vector<EigenPair> pairs;  // beta > 0, ascending beta/eta
  std::vector<EigenPair> reals;  // beta == 0, ascending eta
  Vector char_poly;              // det(xI - A0^-1), monic, ascending powers
  std::vector<std::complex<double>> eigenvalues;  // raw eigenvalues of A0^-1
};

/// Faddeev-LeVerrier recursion for B: characteristic polynomial det(xI - B) and the
/// matrix coefficients of adj(xI - B) = sum_j x^j N_j (j = 0..n-1).
struct FaddeevLeVerrier {
  Vector char_poly;
  std::vector<Matrix> adj_coeffs;

  explicit FaddeevLeVerrier(const Matrix& B) {
    const Index n = B.rows();
    char_poly = Vector::Zero(n + 1);
    char_poly[n] = 1.0;
    adj_coeffs.assign(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    Matrix Mk = Matrix::Zero(n, n);
    const Matrix I = Matrix::Identity(n, n);
    for (Index k = 1; k <= n; ++k) {
      Mk = B * Mk + char_poly[n - k + 1] * I;
      adj_coeffs[static_cast<std::size_t>(n - k)] = Mk;
      char_poly[n - k] = -(B * Mk).trace() / double(k);
    }
  }
};

inline Matrix inverse_butcher(const ButcherTableau& t) {
  Eigen::FullPivLU<Matrix> lu(t.A0);
  if (!lu.isInvertible()) throw SingularSystem(t.name() + ": A0 is singular");
  return lu.inverse();
}

namespace detail {

inline bool is_lower_triangular(const Matrix& A) {
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = i + 1; j < A.cols(); ++j)
      if (A(i, j) != 0.0) return false;
  return true;
}

}  // namespace detail

/// Eigen-decomposes A0^-1 and groups the spectrum into real values and conjugate pairs.
/// Eigenvalues with |Im| < 1e-10 |lambda| are treated as real.
inline SpectralData spectral_decompose(const ButcherTableau& t) {
  const Matrix B = inverse_butcher(t);
  const Index s = B.rows();
  SpectralData sd;

  if (detail::is_lower_triangular(t.A0)) {
    // Exact spectrum; avoids the ill-conditioned eigensolve of a defective matrix.
    for (Index i = 0; i < s; ++i) sd.eigenvalues.emplace_back(1.0 / t.A0(i, i), 0.0);
  } else {
    Eigen::EigenSolver<Matrix> es(B, false);
    if (es.info() != Eigen::Success) throw EigenFailure(t.name() + ": eigensolve failed");
    for (Index i = 0; i < s; ++i) sd.eigenvalues.push_back(es.eigenvalues()[i]);
  }

  int n_upper = 0, n_lower = 0;
  for (const auto& lam : sd.eigenvalues) {
    if (lam.real() <= 0.0)
      throw StabilityViolation(t.name() + ": eigenvalue of A0^-1 with nonpositive real part");
    if (std::abs(lam.imag()) < 1e-10 * std::abs(lam)) {
      sd.reals.push_back(EigenPair::make(lam.real(), 0.0));
    } else if (lam.imag() > 0.0) {
      sd.pairs.push_back(EigenPair::make(lam.real(), lam.imag()));
      ++n_upper;
    } else {
      ++n_lower;
    }
  }
  if (n_upper != n_lower) throw EigenFailure(t.name() + ": unmatched complex eigenvalues");

  std::sort(sd.pairs.begin(), sd.pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    return a.beta / a.eta < b.beta / b.eta;
  });
  std::sort(sd.reals.begin(), sd.reals.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.eta < b.eta; });

  sd.char_poly = FaddeevLeVerrier(B).char_poly;
  return sd;
}

/// The polynomials R_i with z = sum_i R_i(Lhat) M^-1 f_i; R[i] holds ascending coefficients
/// (degree <= s-1) in Lhat = dt M^-1 L.
struct StagePolynomials {
  std::vector<Vector> R;

  int stages() const { return static_cast<int>(R.size()); }
};

/// R_i = sum_r (b0^T A0^-1)_r adj(A0^-1 - xI)_{r,i}, using
/// adj(B - xI) = (-1)^(s-1) adj(xI - B) and the Faddeev-LeVerrier coefficients.
inline StagePolynomials adjugate_row_polynomials(const ButcherTableau& t) {
  const Matrix B = inverse_butcher(t);
  const Index s = B.rows();
  const FaddeevLeVerrier fl(B);
  const Vector w = B.transpose() * t.b0;  // (b0^T A0^-1)^T
  const double sign = (s - 1) % 2 == 0 ? 1.0 : -1.0;

  StagePolynomials polys;
  polys.R.assign(static_cast<std::size_t>(s), Vector::Zero(s));
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j)
      polys.R[static_cast<std::size_t>(i)][j] =
          sign * w.dot(fl.adj_coeffs[static_cast<std::size_t>(j)].col(i));
  return polys;
}

enum class FactorKind { Quadratic, Linear };

/// One factor of the stage determinant: (eta I - Lhat)^2 + beta^2 I or (eta I - Lhat).
struct Factor {
  FactorKind kind = FactorKind::Linear;
  EigenPair pair;

  /// Monic polynomial in x: x^2 - 2 eta x + eta^2 + beta^2, or x - eta.
  Vector monic_polynomial() const {
    if (kind == FactorKind::Quadratic) {
      Vector p(3);
      p << pair.eta * pair.eta + pair.beta * pair.beta, -2.0 * pair.eta, 1.0;
      return p;
    }
    Vector p(2);
    p << -pair.eta, 1.0;
    return p;
  }
};

/// Solve order: conjugate pairs (ascending beta/eta), then real factors.
inline std::vector<Factor> factor_list(const SpectralData& sd) {
  std::vector<Factor> out;
  for (const auto& p : sd.pairs) out.push_back({FactorKind::Quadratic, p});
  for (const auto& r : sd.reals) out.push_back({FactorKind::Linear, r});
  return out;
}

}  // namespace irkprec

#endif  // IRKPREC_SPECTRAL_HPP
