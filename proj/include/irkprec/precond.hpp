#ifndef IRKPREC_PRECOND_HPP
#define IRKPREC_PRECOND_HPP

#include "irkprec/banded.hpp"
#include "irkprec/core.hpp"
#include "irkprec/krylov.hpp"
#include "irkprec/linop.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace irkprec {

enum class InnerKind { Exact, ExactBanded, ExactSparseLU, Jacobi, GaussSeidel, InnerKrylov };

/// Inner preconditioner request. `Exact` resolves to ExactBanded for narrow cyclic bands
/// and ExactSparseLU otherwise.
struct InnerSpec {
  InnerKind kind = InnerKind::Exact;
  int sweeps = 1;           // Jacobi / GaussSeidel
  double tol = 1e-10;       // InnerKrylov
  int max_iters = 100;      // InnerKrylov

  bool is_iterative() const {
    return kind == InnerKind::Jacobi || kind == InnerKind::GaussSeidel ||
           kind == InnerKind::InnerKrylov;
  }
};

inline std::string to_string(const InnerSpec& s) {
  switch (s.kind) {
    case InnerKind::Exact: return "exact";
    case InnerKind::ExactBanded: return "banded";
    case InnerKind::ExactSparseLU: return "sparselu";
    case InnerKind::Jacobi: return "jacobi:" + std::to_string(s.sweeps);
    case InnerKind::GaussSeidel: return "gs:" + std::to_string(s.sweeps);
    case InnerKind::InnerKrylov: {
      // 15 significant digits round-trips any tolerance typed on the command line.
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.15g", s.tol);
      return std::string("krylov:") + buf;
    }
  }
  return "unknown";
}

/// Parses "exact", "banded", "sparselu", "jacobi:k", "gs:k", "krylov:tol".
inline std::optional<InnerSpec> parse_inner(std::string_view text) {
  InnerSpec s;
  const auto colon = text.find(':');
  const std::string head(text.substr(0, colon));
  const std::string arg = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  try {
    if (head == "exact") s.kind = InnerKind::Exact;
    else if (head == "banded") s.kind = InnerKind::ExactBanded;
    else if (head == "sparselu") s.kind = InnerKind::ExactSparseLU;
    else if (head == "jacobi" || head == "gs" || head == "gauss-seidel") {
      s.kind = head == "jacobi" ? InnerKind::Jacobi : InnerKind::GaussSeidel;
      s.sweeps = arg.empty() ? 1 : std::stoi(arg);
      if (s.sweeps < 1) return std::nullopt;
    } else if (head == "krylov") {
      s.kind = InnerKind::InnerKrylov;
      if (!arg.empty()) s.tol = std::stod(arg);
      if (!(s.tol > 0.0)) return std::nullopt;
    } else {
      return std::nullopt;
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!s.is_iterative() && !arg.empty()) return std::nullopt;
  return s;
}

/// Approximate inverse of a shifted operator (gamma M - dt L).
class InnerPreconditioner : public Preconditioner {
 public:
  virtual InnerKind kind() const = 0;
  /// Nonempty when construction found a condition worth reporting (e.g. weak diagonal
  /// dominance for relaxation kinds).
  const std::string& warning() const { return warning_; }

 protected:
  std::string warning_;
};

using InnerPtr = std::shared_ptr<const InnerPreconditioner>;

class BandedPreconditioner final : public InnerPreconditioner {
 public:
  explicit BandedPreconditioner(const SparseMatrix& A) : lu_(A), symmetric_(is_symmetric_matrix(A)) {}
  Index size() const override { return lu_.size(); }
  long apply(const Vector& r, Vector& z) const override {
    lu_.solve(r, z);
    return 1;
  }
  bool is_symmetric() const override { return symmetric_; }
  InnerKind kind() const override { return InnerKind::ExactBanded; }

 private:
  CyclicBandedLU lu_;
  bool symmetric_;
};

class SparseLUPreconditioner final : public InnerPreconditioner {
 public:
  explicit SparseLUPreconditioner(const SparseMatrix& A)
      : n_(A.rows()), symmetric_(is_symmetric_matrix(A)) {
    Eigen::SparseMatrix<double> colmajor = A;
    colmajor.makeCompressed();
    lu_.analyzePattern(colmajor);
    lu_.factorize(colmajor);
    if (lu_.info() != Eigen::Success)
      throw FactorizationFailure("sparse LU failed: " + lu_.lastErrorMessage());
  }
  Index size() const override { return n_; }
  long apply(const Vector& r, Vector& z) const override {
    z = lu_.solve(r);
    return 1;
  }
  bool is_symmetric() const override { return symmetric_; }
  InnerKind kind() const override { return InnerKind::ExactSparseLU; }

 private:
  Index n_;
  bool symmetric_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

/// k stationary sweeps from a zero initial guess.
class RelaxationPreconditioner final : public InnerPreconditioner {
 public:
  RelaxationPreconditioner(const SparseMatrix& A, InnerKind kind, int sweeps)
      : A_(A), kind_(kind), sweeps_(sweeps), diag_(A.rows()) {
    require(sweeps >= 1, "relaxation: sweeps must be >= 1");
    bool dominant = true;
    for (Index i = 0; i < A_.outerSize(); ++i) {
      double d = 0.0, off = 0.0;
      for (SparseMatrix::InnerIterator it(A_, i); it; ++it) {
        if (it.col() == i)
          d += it.value();
        else
          off += std::abs(it.value());
      }
      if (d == 0.0) throw FactorizationFailure("relaxation: zero diagonal at row " + std::to_string(i));
      diag_[i] = d;
      dominant = dominant && std::abs(d) >= off;
    }
    if (!dominant) warning_ = "relaxation preconditioner on a matrix that is not diagonally dominant";
  }

  Index size() const override { return A_.rows(); }
  long apply(const Vector& r, Vector& z) const override {
    z.setZero(r.size());
    if (kind_ == InnerKind::Jacobi) {
      Vector res(r.size());
      for (int k = 0; k < sweeps_; ++k) {
        res.noalias() = r - A_ * z;
        z.array() += res.array() / diag_.array();
      }
    } else {
      for (int k = 0; k < sweeps_; ++k)
        for (Index i = 0; i < A_.outerSize(); ++i) {
          double acc = r[i];
          for (SparseMatrix::InnerIterator it(A_, i); it; ++it)
            if (it.col() != i) acc -= it.value() * z[it.col()];
          z[i] = acc / diag_[i];
        }
    }
    return sweeps_;
  }
  bool is_symmetric() const override {
    return kind_ == InnerKind::Jacobi && is_symmetric_matrix(A_);
  }
  InnerKind kind() const override { return kind_; }

 private:
  SparseMatrix A_;
  InnerKind kind_;
  int sweeps_;
  Vector diag_;
};

/// GMRES(30) on the shifted operator, preconditioned by one Gauss-Seidel sweep.
/// Variable: outer solves must use FGMRES.
class InnerKrylovPreconditioner final : public InnerPreconditioner {
 public:
  InnerKrylovPreconditioner(OperatorPtr op, double tol, int max_iters)
      : op_(std::move(op)), gs_(*op_->sparse(), InnerKind::GaussSeidel, 1) {
    cfg_.method = KrylovMethod::GMRES;
    cfg_.rel_tol = tol;
    cfg_.max_iters = max_iters;
    cfg_.restart = 30;
    warning_ = gs_.warning();
  }
  Index size() const override { return op_->size(); }
  long apply(const Vector& r, Vector& z) const override {
    auto res = solve(*op_, r, gs_, cfg_);
    z = std::move(res.x);
    return res.report.preconditioner_applications;
  }
  bool is_variable() const override { return true; }
  InnerKind kind() const override { return InnerKind::InnerKrylov; }

 private:
  OperatorPtr op_;
  RelaxationPreconditioner gs_;
  KrylovConfig cfg_;
};

/// Builds the preconditioner for `op`, which must expose a sparse form.
inline InnerPtr build_inner_preconditioner(const InnerSpec& spec, const OperatorPtr& op) {
  const SparseMatrix* A = op->sparse();
  if (!A) throw InvalidArgument("inner preconditioner requires an assembled operator");
  InnerKind kind = spec.kind;
  if (kind == InnerKind::Exact) {
    const Index p = cyclic_half_bandwidth(*A);
    kind = (p <= 8 && 2 * p + 1 < A->rows()) ? InnerKind::ExactBanded : InnerKind::ExactSparseLU;
  }
  switch (kind) {
    case InnerKind::ExactBanded: return std::make_shared<BandedPreconditioner>(*A);
    case InnerKind::ExactSparseLU: return std::make_shared<SparseLUPreconditioner>(*A);
    case InnerKind::Jacobi:
    case InnerKind::GaussSeidel:
      return std::make_shared<RelaxationPreconditioner>(*A, kind, spec.sweeps);
    case InnerKind::InnerKrylov:
      return std::make_shared<InnerKrylovPreconditioner>(op, spec.tol, spec.max_iters);
    case InnerKind::Exact: break;
  }
  throw InvalidArgument("unknown inner preconditioner kind");
}

}  // namespace irkprec

#endif  // IRKPREC_PRECOND_HPP
