#ifndef IRKPREC_LINOP_HPP
#define IRKPREC_LINOP_HPP

#include "irkprec/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

namespace irkprec {

/// y = Op x for a square operator of fixed dimension. Implementations are immutable after
/// construction; apply must be safe to call concurrently.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index size() const = 0;
  virtual void apply(const Vector& x, Vector& y) const = 0;

  /// Assembled form, when the operator has one.
  virtual const SparseMatrix* sparse() const { return nullptr; }
  virtual bool is_symmetric() const { return false; }

  Vector operator*(const Vector& x) const {
    Vector y(size());
    apply(x, y);
    return y;
  }
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

/// Mass operator: apply gives M v, solve gives M^-1 v.
class MassOperator : public LinearOperator {
 public:
  virtual void solve(const Vector& b, Vector& x) const = 0;
  virtual bool is_identity() const { return false; }

  Vector solve(const Vector& b) const {
    Vector x(size());
    solve(b, x);
    return x;
  }
};

using MassPtr = std::shared_ptr<const MassOperator>;

inline bool is_symmetric_matrix(const SparseMatrix& A, double tol = 1e-14) {
  const SparseMatrix At = A.transpose();
  const double scale = std::max(1.0, A.norm());
  return (A - At).norm() <= tol * scale;
}

class SparseOperator final : public LinearOperator {
 public:
  explicit SparseOperator(SparseMatrix A) : A_(std::move(A)) {
    if (A_.rows() != A_.cols()) throw DimensionMismatch("SparseOperator: matrix not square");
    A_.makeCompressed();
    symmetric_ = is_symmetric_matrix(A_);
  }

  Index size() const override { return A_.rows(); }
  void apply(const Vector& x, Vector& y) const override { y.noalias() = A_ * x; }
  const SparseMatrix* sparse() const override { return &A_; }
  bool is_symmetric() const override { return symmetric_; }
  const SparseMatrix& matrix() const { return A_; }

 private:
  SparseMatrix A_;
  bool symmetric_ = false;
};

/// alpha A + beta B applied matrix-free.
class LinearCombination final : public LinearOperator {
 public:
  LinearCombination(double alpha, OperatorPtr A, double beta, OperatorPtr B)
      : alpha_(alpha), beta_(beta), A_(std::move(A)), B_(std::move(B)) {
    require_same_size(A_->size(), B_->size(), "LinearCombination");
  }

  Index size() const override { return A_->size(); }
  void apply(const Vector& x, Vector& y) const override {
    Vector t(size());
    A_->apply(x, y);
    B_->apply(x, t);
    y = alpha_ * y + beta_ * t;
  }
  bool is_symmetric() const override { return A_->is_symmetric() && B_->is_symmetric(); }

 private:
  double alpha_, beta_;
  OperatorPtr A_, B_;
};

/// alpha A + beta B, assembled when both expose a sparse form.
inline OperatorPtr combine(double alpha, const OperatorPtr& A, double beta, const OperatorPtr& B) {
  require_same_size(A->size(), B->size(), "combine");
  if (A->sparse() && B->sparse()) {
    SparseMatrix C = alpha * (*A->sparse()) + beta * (*B->sparse());
    C.prune(0.0);
    return std::make_shared<SparseOperator>(std::move(C));
  }
  return std::make_shared<LinearCombination>(alpha, A, beta, B);
}

/// gamma M - dt L.
inline OperatorPtr shifted_operator(double gamma, double dt, const OperatorPtr& M,
                                    const OperatorPtr& L) {
  require(gamma > 0.0, "shifted_operator: gamma must be positive");
  require(dt >= 0.0, "shifted_operator: dt must be nonnegative");
  return combine(gamma, M, -dt, L);
}

inline Matrix to_dense(const LinearOperator& op) {
  if (const auto* A = op.sparse()) return Matrix(*A);
  const Index n = op.size();
  Matrix D(n, n);
  Vector e = Vector::Zero(n), col(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    D.col(j) = col;
    e[j] = 0.0;
  }
  return D;
}

/// Largest cyclic offset min(|i-j|, n-|i-j|) over the nonzeros of A.
inline Index cyclic_half_bandwidth(const SparseMatrix& A) {
  const Index n = A.rows();
  Index p = 0;
  for (Index i = 0; i < A.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      if (it.value() == 0.0) continue;
      const Index d = std::abs(it.row() - it.col());
      p = std::max(p, std::min(d, n - d));
    }
  return p;
}

/// Roundoff allowance for the Assumption-2 gate on an operator of this size.
inline double fov_tolerance(const LinearOperator& L) {
  double scale = 1.0;
  if (const auto* A = L.sparse()) {
    for (Index i = 0; i < A->outerSize(); ++i) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(*A, i); it; ++it) row += std::abs(it.value());
      scale = std::max(scale, row);
    }
  } else {
    scale = std::max(1.0, to_dense(L).cwiseAbs().rowwise().sum().maxCoeff());
  }
  return 1e-12 * scale;
}

namespace detail {

// True when tau I - S is positive definite, i.e. every eigenvalue of the symmetric S is
// below tau. Sparse LDL^T with all pivots positive is a proof by Sylvester's law of inertia.
inline bool eigenvalues_below(const SparseMatrix& S, double tau) {
  SparseMatrix I(S.rows(), S.cols());
  I.setIdentity();
  const Eigen::SparseMatrix<double> T = tau * I - S;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(T);
  if (ldlt.info() != Eigen::Success) return false;
  return (ldlt.vectorD().array() > 0.0).all();
}

}  // namespace detail

/// max Re W(L) = largest eigenvalue of (L + L^T)/2. Exact (dense) for n <= 512. Larger sparse
/// operators are certified against fov_tolerance(L) by factorization: the result is that
/// tolerance when the certificate holds, and a value above it otherwise.
inline double fov_upper_bound(const LinearOperator& L) {
  const Index n = L.size();
  const auto* A = L.sparse();
  if (n <= 512 || !A) {
    if (n > 4096) throw InvalidArgument("fov_upper_bound: operator too large for a dense eigensolve");
    const Matrix D = to_dense(L);
    const Matrix S = 0.5 * (D + D.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigenFailure("symmetric-part eigensolve failed");
    return es.eigenvalues()[n - 1];
  }
  const SparseMatrix At = A->transpose();
  const SparseMatrix S = 0.5 * (*A + At);
  const double tau = fov_tolerance(L);
  if (detail::eigenvalues_below(S, tau)) return tau;
  // Certificate failed: double the shift until it certifies, giving a coarse upper bound.
  double hi = std::max(2.0 * tau, 1e-8);
  while (!detail::eigenvalues_below(S, hi)) hi *= 2.0;
  return hi;
}

}  // namespace irkprec

#endif  // IRKPREC_LINOP_HPP
