#ifndef IRKPREC_VERIFY_HPP
#define IRKPREC_VERIFY_HPP

// Dense checks of the conditioning theory for
//   P = (delta I - L)^-1 (gamma I - L)^-1 [(eta I - L)^2 + beta^2 I],
// valid for real L with max Re W(L) <= 0.

#include "irkprec/core.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <vector>

namespace irkprec {

struct CondResult {
  double kappa_measured = 0.0;
  double kappa_bound = 0.0;  // bound for the shift pair (delta, (eta^2+beta^2)/delta)
  double delta = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double beta = 0.0;
};

/// (delta + (eta^2+beta^2)/delta) / (2 eta); with delta = sqrt(eta^2+beta^2) this is
/// sqrt(1 + beta^2/eta^2).
inline double kappa_bound(double eta, double beta, double delta) {
  return (delta + (eta * eta + beta * beta) / delta) / (2.0 * eta);
}

inline Matrix preconditioned_operator(const Matrix& L, double eta, double beta, double delta,
                                      double gamma) {
  require(L.rows() == L.cols(), "preconditioned_operator: L must be square");
  const Index n = L.rows();
  const Matrix I = Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> Ld(delta * I - L), Lg(gamma * I - L);
  if (!Ld.isInvertible() || !Lg.isInvertible())
    throw SingularShift("shifted matrix is singular");
  const Matrix E = eta * I - L;
  const Matrix Q = E * E + beta * beta * I;
  return Ld.solve(Lg.solve(Q));
}

inline CondResult compute_kappa(const Matrix& L, double eta, double beta, double delta,
                                double gamma) {
  require(L.rows() <= 512, "compute_kappa: N capped at 512");
  require(eta > 0.0 && delta > 0.0 && gamma > 0.0, "compute_kappa: eta, delta, gamma must be positive");
  const Matrix P = preconditioned_operator(L, eta, beta, delta, gamma);
  Eigen::JacobiSVD<Matrix> svd(P);
  const auto& sv = svd.singularValues();
  CondResult r;
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0)) throw SingularShift("preconditioned operator is singular");
  r.kappa_measured = sv[0] / smin;
  r.kappa_bound = kappa_bound(eta, beta, delta);
  r.delta = delta;
  r.gamma = gamma;
  r.eta = eta;
  r.beta = beta;
  return r;
}

/// H(xi) = |P v|^2 / |v|^2 for an eigenvector of L with eigenvalue i xi.
inline double h_value(double delta, double gamma, double eta, double beta, double xi) {
  const double gs = (eta * eta + beta * beta) / delta;
  const double x2 = xi * xi;
  const double num = (delta * gs - x2) * (delta * gs - x2) + (2.0 * eta * xi) * (2.0 * eta * xi);
  const double den = (delta * gamma - x2) * (delta * gamma - x2) + x2 * (delta + gamma) * (delta + gamma);
  return num / den;
}

inline std::vector<double> h_scan(double delta, double gamma, double eta, double beta,
                                  const std::vector<double>& xi_grid) {
  std::vector<double> out;
  out.reserve(xi_grid.size());
  for (double xi : xi_grid) out.push_back(h_value(delta, gamma, eta, beta, xi));
  return out;
}

/// 0 (+) omega [[0, 1], [-1, 0]] with eigenvalues {0, +-i omega}. omega^2 = delta gamma*
/// = eta^2 + beta^2 for every delta, so the matrix does not depend on delta.
inline Matrix tight_matrix(double eta, double beta) {
  const double omega = std::hypot(eta, beta);
  Matrix L = Matrix::Zero(3, 3);
  L(1, 2) = omega;
  L(2, 1) = -omega;
  return L;
}

struct ProofConstants {
  bool gamma_is_optimal = false;  // gamma = (eta^2+beta^2)/delta, which makes c0 = 1
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

inline ProofConstants proof_constants(double delta, double gamma, double eta, double beta) {
  require(delta > 0.0 && gamma > 0.0, "proof_constants: delta, gamma must be positive");
  ProofConstants pc;
  const double g2 = eta * eta + beta * beta;
  pc.c2 = 2.0 * eta / (delta + gamma);
  pc.c1 = g2 / (delta * gamma) * pc.c2;
  pc.c3 = pc.c2 * pc.c2;
  pc.gamma_is_optimal = std::abs(gamma * delta - g2) <= 1e-12 * g2;
  return pc;
}

struct OptimalityRow {
  double gamma = 0.0;
  double ratio = 0.0;      // lower bound on kappa^2(P_{delta,gamma}) from two H values
  double reference = 0.0;  // kappa^2 bound at the optimal shift: 1 + beta^2/eta^2
};

/// With delta = gamma* = sqrt(eta^2+beta^2): H(0)/H(omega) for gamma < gamma*, and
/// H(inf)/H(omega) = 1/H(omega) for gamma >= gamma*, omega = sqrt(delta gamma*).
inline std::vector<OptimalityRow> optimality_probe(double eta, double beta,
                                                   const std::vector<double>& gamma_grid) {
  const double gs = std::hypot(eta, beta);
  const double delta = gs;
  const double omega = std::sqrt(delta * gs);
  std::vector<OptimalityRow> rows;
  for (double g : gamma_grid) {
    require(g > 0.0, "optimality_probe: gamma must be positive");
    OptimalityRow r;
    r.gamma = g;
    const double h_omega = h_value(delta, g, eta, beta, omega);
    r.ratio = g < gs ? h_value(delta, g, eta, beta, 0.0) / h_omega : 1.0 / h_omega;
    r.reference = 1.0 + beta * beta / (eta * eta);
    rows.push_back(r);
  }
  return rows;
}

/// Worst-case matrix for the probe: the tight matrix plus, when gamma > gamma*, a rotation
/// block with a very large frequency that drives H toward its limit 1.
inline Matrix worst_case_matrix(double eta, double beta, double gamma) {
  const double gs = std::hypot(eta, beta);
  Matrix T = tight_matrix(eta, beta);
  if (gamma <= gs) return T;
  Matrix L = Matrix::Zero(5, 5);
  L.topLeftCorner(3, 3) = T;
  const double big = 1e6 * gs;
  L(3, 4) = big;
  L(4, 3) = -big;
  return L;
}

/// S + K with S = -B B^T (negative semidefinite) and K = C - C^T, entries of B and C drawn
/// from N(0, 1/n) and the sum multiplied by `scale`.
template <class Rng>
Matrix random_stable_matrix(Index n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(double(n)));
  Matrix B(n, n), C(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      B(i, j) = g(rng);
      C(i, j) = g(rng);
    }
  return scale * (-B * B.transpose() + (C - C.transpose()));
}

}  // namespace irkprec

#endif  // IRKPREC_VERIFY_HPP
