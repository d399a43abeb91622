#ifndef IRKPREC_PROBLEM_HPP
#define IRKPREC_PROBLEM_HPP

#include "irkprec/core.hpp"
#include "irkprec/linop.hpp"
#include "irkprec/mass.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>

namespace irkprec {

/// Writes f(t) into `out` (already sized).
using Forcing = std::function<void(double t, Vector& out)>;
using ExactSolution = std::function<Vector(double t)>;

/// M u' = L u + f(t).
class LinearProblem {
 public:
  /// Rejects operators whose field of values reaches into the right half plane unless
  /// `check_fov` is false.
  LinearProblem(MassPtr M, OperatorPtr L, Forcing f = {}, ExactSolution exact = {},
                bool check_fov = true)
      : M_(std::move(M)), L_(std::move(L)), f_(std::move(f)), exact_(std::move(exact)) {
    require_same_size(M_->size(), L_->size(), "LinearProblem");
    if (check_fov) {
      fov_ = fov_upper_bound(*L_);
      if (fov_ > fov_tolerance(*L_))
        throw StabilityViolation("spatial operator has max Re W(L) = " + std::to_string(fov_));
    }
  }

  Index size() const { return L_->size(); }
  const MassOperator& mass() const { return *M_; }
  const LinearOperator& op() const { return *L_; }
  const MassPtr& mass_ptr() const { return M_; }
  const OperatorPtr& op_ptr() const { return L_; }
  double fov() const { return fov_; }

  bool has_forcing() const { return static_cast<bool>(f_); }
  void forcing(double t, Vector& out) const {
    out.setZero(size());
    if (f_) f_(t, out);
  }

  /// f(t) + L u_n, with L u_n supplied by the caller (evaluated once per step).
  void stage_rhs(double t, const Vector& Lu, Vector& out) const {
    forcing(t, out);
    out += Lu;
  }

  bool has_exact() const { return static_cast<bool>(exact_); }
  Vector exact(double t) const {
    if (!exact_) throw InvalidArgument("problem has no exact solution");
    return exact_(t);
  }

 private:
  MassPtr M_;
  OperatorPtr L_;
  Forcing f_;
  ExactSolution exact_;
  double fov_ = 0.0;
};

}  // namespace irkprec

#endif  // IRKPREC_PROBLEM_HPP
