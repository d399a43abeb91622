#ifndef IRKPREC_MASS_HPP
#define IRKPREC_MASS_HPP

#include "irkprec/banded.hpp"
#include "irkprec/core.hpp"
#include "irkprec/krylov.hpp"
#include "irkprec/linop.hpp"

#include <memory>
#include <optional>
#include <utility>

namespace irkprec {

class IdentityMass final : public MassOperator {
 public:
  explicit IdentityMass(Index n) : I_(n, n) { I_.setIdentity(); }

  Index size() const override { return I_.rows(); }
  void apply(const Vector& x, Vector& y) const override { y = x; }
  using MassOperator::solve;
  void solve(const Vector& b, Vector& x) const override { x = b; }
  const SparseMatrix* sparse() const override { return &I_; }
  bool is_symmetric() const override { return true; }
  bool is_identity() const override { return true; }

 private:
  SparseMatrix I_;
};

class DiagonalOperatorPreconditioner final : public Preconditioner {
 public:
  explicit DiagonalOperatorPreconditioner(Vector inv_diag) : inv_diag_(std::move(inv_diag)) {}
  Index size() const override { return inv_diag_.size(); }
  long apply(const Vector& r, Vector& z) const override {
    z = r.cwiseProduct(inv_diag_);
    return 1;
  }
  bool is_symmetric() const override { return true; }

 private:
  Vector inv_diag_;
};

/// SPD sparse mass matrix. Diagonal and narrow cyclic-banded matrices are solved exactly;
/// anything else by Jacobi-preconditioned CG to relative 1e-14.
class SparseMass final : public MassOperator {
 public:
  explicit SparseMass(SparseMatrix M) : op_(std::move(M)) {
    const SparseMatrix& A = op_.matrix();
    const Index p = cyclic_half_bandwidth(A);
    if (p == 0) {
      inv_diag_ = A.diagonal().cwiseInverse();
    } else if (p <= 8 && 2 * p + 1 < A.rows()) {
      banded_.emplace(A);
    } else {
      inv_diag_ = A.diagonal().cwiseInverse();
      iterative_ = true;
    }
  }

  Index size() const override { return op_.size(); }
  void apply(const Vector& x, Vector& y) const override { op_.apply(x, y); }
  const SparseMatrix* sparse() const override { return op_.sparse(); }
  bool is_symmetric() const override { return op_.is_symmetric(); }

  using MassOperator::solve;
  void solve(const Vector& b, Vector& x) const override {
    if (banded_) {
      banded_->solve(b, x);
    } else if (!iterative_) {
      x = b.cwiseProduct(inv_diag_);
    } else {
      KrylovConfig cfg;
      cfg.method = KrylovMethod::CG;
      cfg.rel_tol = 1e-14;
      cfg.max_iters = 10 * static_cast<int>(size());
      auto res = irkprec::solve(op_, b, DiagonalOperatorPreconditioner(inv_diag_), cfg);
      if (!res.report.converged) throw SingularSystem("mass solve did not converge");
      x = std::move(res.x);
    }
  }

 private:
  SparseOperator op_;
  std::optional<CyclicBandedLU> banded_;
  Vector inv_diag_;
  bool iterative_ = false;
};

}  // namespace irkprec

#endif  // IRKPREC_MASS_HPP
