#ifndef IRKPREC_STEPPER_HPP
#define IRKPREC_STEPPER_HPP

// Time steppers for M u' = L u + f(t):
//   IRKStepper          - adjugate RHS assembly + sequential conjugate-pair factor solves
//   advance_oracle      - dense solve of the full Ns x Ns stage system
//   SdirkStepper        - stage-by-stage substitution baseline
//   BlockPrecStepper    - GMRES on the stage system with GSL / LD block preconditioners

#include "irkprec/core.hpp"
#include "irkprec/krylov.hpp"
#include "irkprec/linop.hpp"
#include "irkprec/precond.hpp"
#include "irkprec/problem.hpp"
#include "irkprec/spectral.hpp"
#include "irkprec/tableau.hpp"

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace irkprec {

enum class GammaMode { GammaStar, Eta };

inline std::string to_string(GammaMode m) { return m == GammaMode::GammaStar ? "gammastar" : "eta"; }

struct StepperOptions {
  KrylovConfig outer;       // tolerances and restart; method ignored when auto_method
  bool auto_method = true;  // CG / GMRES / FGMRES chosen from operator symmetry and inner kind
  InnerSpec inner;
  GammaMode gamma_mode = GammaMode::GammaStar;
};

/// Outer Krylov method for shifted-operator solves on this problem.
inline KrylovMethod choose_outer_method(const LinearProblem& p, const StepperOptions& opt) {
  if (!opt.auto_method) return opt.outer.method;
  if (opt.inner.kind == InnerKind::InnerKrylov) return KrylovMethod::FGMRES;
  if (!opt.inner.is_iterative() && p.mass().is_symmetric() && p.op().is_symmetric())
    return KrylovMethod::CG;
  return KrylovMethod::GMRES;
}

/// Thrown when an outer factor solve does not converge.
class FactorSolveFailure : public Error {
 public:
  FactorSolveFailure(int factor_index, KrylovReport report)
      : Error("factor " + std::to_string(factor_index) + " solve did not converge after " +
              std::to_string(report.iterations) + " iterations"),
        factor_index_(factor_index),
        report_(std::move(report)) {}
  int factor_index() const { return factor_index_; }
  const KrylovReport& report() const { return report_; }

 private:
  int factor_index_;
  KrylovReport report_;
};

struct StepResult {
  Vector u;
  std::vector<KrylovReport> reports;  // one per factor (IRK), stage (SDIRK) or step (block)
  int work_vectors = 0;               // length-N vectors allocated by the step itself
};

namespace detail {

// Hands out length-n work vectors and counts them.
class Workspace {
 public:
  explicit Workspace(Index n) : n_(n) {}
  Vector& take() {
    vecs_.emplace_back(Vector::Zero(n_));
    return vecs_.back();
  }
  int count() const { return static_cast<int>(vecs_.size()); }

 private:
  Index n_;
  std::deque<Vector> vecs_;
};

// M Q_eta = (eta M - dt L) M^-1 (eta M - dt L) + beta^2 M, applied matrix-free with one
// mass solve per application.
class ScaledQuadraticOperator final : public LinearOperator {
 public:
  ScaledQuadraticOperator(OperatorPtr shifted, MassPtr M, double beta)
      : A_(std::move(shifted)), M_(std::move(M)), beta2_(beta * beta) {}

  Index size() const override { return A_->size(); }
  void apply(const Vector& x, Vector& y) const override {
    Vector t(size()), u(size());
    A_->apply(x, t);
    M_->solve(t, u);
    A_->apply(u, y);
    M_->apply(x, t);
    y += beta2_ * t;
  }
  bool is_symmetric() const override { return A_->is_symmetric() && M_->is_symmetric(); }

 private:
  OperatorPtr A_;
  MassPtr M_;
  double beta2_;
};

// P M P for the scaled quadratic, P ~ (gamma M - dt L)^-1.
class SandwichPreconditioner final : public Preconditioner {
 public:
  SandwichPreconditioner(InnerPtr P, MassPtr M) : P_(std::move(P)), M_(std::move(M)) {}
  Index size() const override { return P_->size(); }
  long apply(const Vector& r, Vector& z) const override {
    Vector t(size()), u(size());
    long n = P_->apply(r, t);
    M_->apply(t, u);
    n += P_->apply(u, z);
    return n;
  }
  bool is_variable() const override { return P_->is_variable(); }
  bool is_symmetric() const override { return P_->is_symmetric() && M_->is_symmetric(); }

 private:
  InnerPtr P_;
  MassPtr M_;
};

}  // namespace detail

/// Per-factor solve data, built once per (dt, gamma) and reused every step.
struct FactorSolver {
  Factor factor;
  double shift = 0.0;        // preconditioner gamma
  OperatorPtr system;        // M Q_eta or (eta M - dt L)
  InnerPtr inner;            // ~ (shift M - dt L)^-1
  PreconditionerPtr precond; // P M P or P
  KrylovMethod method = KrylovMethod::GMRES;
};

class IRKStepper {
 public:
  IRKStepper(ButcherTableau tableau, std::shared_ptr<const LinearProblem> problem, double dt,
             StepperOptions options = {})
      : tableau_(std::move(tableau)), problem_(std::move(problem)), dt_(dt), opt_(options) {
    require(dt_ > 0.0, "IRKStepper: dt must be positive");
    spectral_ = spectral_decompose(tableau_);
    polys_ = adjugate_row_polynomials(tableau_);
    build_factor_solvers();
  }

  const ButcherTableau& tableau() const { return tableau_; }
  const SpectralData& spectral() const { return spectral_; }
  const StagePolynomials& polynomials() const { return polys_; }
  const std::vector<FactorSolver>& factors() const { return solvers_; }
  const LinearProblem& problem() const { return *problem_; }
  double dt() const { return dt_; }
  const StepperOptions& options() const { return opt_; }

  /// z = sum_i R_i(Lhat) M^-1 f_i, f_i = f(t_n + c_i dt) + L u_n.
  Vector assemble_rhs_z(const Vector& u_n, double t_n) const {
    detail::Workspace ws(problem_->size());
    Vector z = Vector::Zero(problem_->size());
    assemble_into(u_n, t_n, z, ws);
    return z;
  }

  /// y = P_s(Lhat)^-1 z, one fully converged factor solve after another.
  std::pair<Vector, std::vector<KrylovReport>> solve_factors(const Vector& z) const {
    detail::Workspace ws(problem_->size());
    Vector y = z;
    auto reports = solve_into(y, ws);
    return {std::move(y), std::move(reports)};
  }

  /// u_{n+1} = u_n + dt P_s(Lhat)^-1 z. Stores no stage vectors.
  StepResult advance(const Vector& u_n, double t_n) const {
    require_same_size(u_n.size(), problem_->size(), "IRKStepper::advance");
    detail::Workspace ws(problem_->size());
    Vector& z = ws.take();
    assemble_into(u_n, t_n, z, ws);
    StepResult out;
    out.reports = solve_into(z, ws);
    out.u = u_n + dt_ * z;
    out.work_vectors = ws.count();
    return out;
  }

 private:
  void build_factor_solvers() {
    const auto& P = *problem_;
    const KrylovMethod method = choose_outer_method(P, opt_);
    for (const auto& f : factor_list(spectral_)) {
      FactorSolver fs;
      fs.factor = f;
      fs.method = method;
      const double eta = f.pair.eta;
      OperatorPtr shifted_eta = shifted_operator(eta, dt_, P.mass_ptr(), P.op_ptr());
      if (f.kind == FactorKind::Quadratic) {
        fs.shift = opt_.gamma_mode == GammaMode::GammaStar ? f.pair.gamma_star : eta;
        OperatorPtr shifted_pc = fs.shift == eta
                                     ? shifted_eta
                                     : shifted_operator(fs.shift, dt_, P.mass_ptr(), P.op_ptr());
        fs.inner = build_inner_preconditioner(opt_.inner, shifted_pc);
        fs.system = std::make_shared<detail::ScaledQuadraticOperator>(shifted_eta, P.mass_ptr(),
                                                                      f.pair.beta);
        fs.precond = std::make_shared<detail::SandwichPreconditioner>(fs.inner, P.mass_ptr());
      } else {
        fs.shift = eta;
        fs.inner = build_inner_preconditioner(opt_.inner, shifted_eta);
        fs.system = shifted_eta;
        fs.precond = fs.inner;
      }
      if (method == KrylovMethod::CG) {
        detail::probe_symmetry(*fs.system, "factor operator");
        detail::probe_symmetry(detail::PreconditionerAsOperator(*fs.precond), "preconditioner");
      }
      solvers_.push_back(std::move(fs));
    }
  }

  void assemble_into(const Vector& u_n, double t_n, Vector& z, detail::Workspace& ws) const {
    const auto& P = *problem_;
    Vector& Lu = ws.take();
    Vector& f = ws.take();
    Vector& g = ws.take();
    Vector& acc = ws.take();
    Vector& tmp = ws.take();
    P.op().apply(u_n, Lu);
    z.setZero();
    const int s = tableau_.s;
    for (int i = 0; i < s; ++i) {
      const Vector& r = polys_.R[static_cast<std::size_t>(i)];
      P.stage_rhs(t_n + dt_ * tableau_.c0[i], Lu, f);
      P.mass().solve(f, g);
      // Horner: acc = r_{s-1} g; acc = Lhat acc + r_k g.
      acc = r[s - 1] * g;
      for (int k = s - 2; k >= 0; --k) {
        P.op().apply(acc, tmp);
        P.mass().solve(tmp, acc);
        acc *= dt_;
        acc += r[k] * g;
      }
      z += acc;
    }
  }

  std::vector<KrylovReport> solve_into(Vector& z, detail::Workspace& ws) const {
    const auto& P = *problem_;
    Vector& rhs = ws.take();
    std::vector<KrylovReport> reports;
    for (std::size_t k = 0; k < solvers_.size(); ++k) {
      const auto& fs = solvers_[k];
      P.mass().apply(z, rhs);
      KrylovConfig cfg = opt_.outer;
      cfg.method = fs.method;
      cfg.symmetry_probe = false;  // probed once at construction
      auto res = solve(*fs.system, rhs, *fs.precond, cfg);
      if (!res.report.converged)
        throw FactorSolveFailure(static_cast<int>(k), std::move(res.report));
      z = std::move(res.x);
      reports.push_back(std::move(res.report));
    }
    return reports;
  }

  ButcherTableau tableau_;
  std::shared_ptr<const LinearProblem> problem_;
  double dt_;
  StepperOptions opt_;
  SpectralData spectral_;
  StagePolynomials polys_;
  std::vector<FactorSolver> solvers_;
};

/// Dense reference step: assembles I (x) M - dt A0 (x) L, solves for the stage vectors and
/// applies the Runge-Kutta sum.
inline Vector advance_oracle(const ButcherTableau& t, const LinearProblem& problem,
                             const Vector& u_n, double t_n, double dt) {
  const Index N = problem.size();
  const Index s = t.s;
  if (N * s > 4096) throw InvalidArgument("advance_oracle: N*s exceeds the dense limit 4096");
  const Matrix M = to_dense(problem.mass());
  const Matrix L = to_dense(problem.op());
  Matrix K(N * s, N * s);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j)
      K.block(i * N, j * N, N, N) = (i == j ? M : Matrix::Zero(N, N)) - dt * t.A0(i, j) * L;
  const Vector Lu = L * u_n;
  Vector rhs(N * s), fi(N);
  for (Index i = 0; i < s; ++i) {
    problem.stage_rhs(t_n + dt * t.c0[i], Lu, fi);
    rhs.segment(i * N, N) = fi;
  }
  Eigen::PartialPivLU<Matrix> lu(K);
  if (!(lu.rcond() > 1e-14)) throw SingularSystem("advance_oracle: stage system is singular");
  const Vector k = lu.solve(rhs);
  Vector u = u_n;
  for (Index i = 0; i < s; ++i) u += dt * t.b0[i] * k.segment(i * N, N);
  return u;
}

/// Stage-by-stage substitution for lower-triangular A0; one preconditioned solve per stage.
class SdirkStepper {
 public:
  SdirkStepper(ButcherTableau tableau, std::shared_ptr<const LinearProblem> problem, double dt,
               StepperOptions options = {})
      : tableau_(std::move(tableau)), problem_(std::move(problem)), dt_(dt), opt_(options) {
    require(dt_ > 0.0, "SdirkStepper: dt must be positive");
    if (!detail::is_lower_triangular(tableau_.A0))
      throw InvalidArgument(tableau_.name() + " is not diagonally implicit");
    method_ = choose_outer_method(*problem_, opt_);
    for (int i = 0; i < tableau_.s; ++i) {
      const double a = tableau_.A0(i, i);
      if (a == 0.0 || stage_ops_.count(a)) continue;
      OperatorPtr op = combine(1.0, problem_->mass_ptr(), -dt_ * a, problem_->op_ptr());
      stage_ops_.emplace(a, std::pair{op, build_inner_preconditioner(opt_.inner, op)});
    }
  }

  StepResult advance(const Vector& u_n, double t_n) const {
    const auto& P = *problem_;
    const Index N = P.size();
    const int s = tableau_.s;
    std::vector<Vector> k(static_cast<std::size_t>(s), Vector::Zero(N));
    StepResult out;
    Vector w(N), Lw(N), rhs(N);
    for (int i = 0; i < s; ++i) {
      w = u_n;
      for (int j = 0; j < i; ++j) w += dt_ * tableau_.A0(i, j) * k[static_cast<std::size_t>(j)];
      P.op().apply(w, Lw);
      P.stage_rhs(t_n + dt_ * tableau_.c0[i], Lw, rhs);
      const double a = tableau_.A0(i, i);
      if (a == 0.0) {
        P.mass().solve(rhs, k[static_cast<std::size_t>(i)]);
        continue;
      }
      const auto& [op, pc] = stage_ops_.at(a);
      KrylovConfig cfg = opt_.outer;
      cfg.method = method_;
      auto res = solve(*op, rhs, *pc, cfg);
      if (!res.report.converged) throw FactorSolveFailure(i, std::move(res.report));
      k[static_cast<std::size_t>(i)] = std::move(res.x);
      out.reports.push_back(std::move(res.report));
    }
    out.u = u_n;
    for (int i = 0; i < s; ++i) out.u += dt_ * tableau_.b0[i] * k[static_cast<std::size_t>(i)];
    out.work_vectors = s + 3;
    return out;
  }

  const ButcherTableau& tableau() const { return tableau_; }

 private:
  ButcherTableau tableau_;
  std::shared_ptr<const LinearProblem> problem_;
  double dt_;
  StepperOptions opt_;
  KrylovMethod method_ = KrylovMethod::GMRES;
  std::map<double, std::pair<OperatorPtr, InnerPtr>> stage_ops_;
};

enum class BlockVariant { GSL, LD };

inline std::string to_string(BlockVariant v) { return v == BlockVariant::GSL ? "gsl" : "ld"; }

/// Lower-triangular matrix defining the block preconditioner: tril(A0) for GSL, L*D of the
/// unpivoted A0 = L D U factorization for LD.
inline Matrix block_splitting(const Matrix& A0, BlockVariant variant) {
  const Index s = A0.rows();
  if (variant == BlockVariant::GSL) return A0.triangularView<Eigen::Lower>();
  Matrix L = Matrix::Identity(s, s), U = A0;
  for (Index k = 0; k < s; ++k) {
    if (U(k, k) == 0.0) throw FactorizationFailure("LDU of A0: zero pivot");
    for (Index i = k + 1; i < s; ++i) {
      L(i, k) = U(i, k) / U(k, k);
      U.row(i) -= L(i, k) * U.row(k);
    }
  }
  return L * U.diagonal().asDiagonal();
}

/// GMRES on the full stage system (I (x) M - dt A0 (x) L) k = f, preconditioned by forward
/// block substitution with a lower-triangular splitting of A0.
class BlockPrecStepper {
 public:
  BlockPrecStepper(ButcherTableau tableau, std::shared_ptr<const LinearProblem> problem,
                   double dt, BlockVariant variant, StepperOptions options = {})
      : tableau_(std::move(tableau)),
        problem_(std::move(problem)),
        dt_(dt),
        variant_(variant),
        opt_(options) {
    require(dt_ > 0.0, "BlockPrecStepper: dt must be positive");
    split_ = block_splitting(tableau_.A0, variant_);
    for (int i = 0; i < tableau_.s; ++i) {
      const double a = split_(i, i);
      if (diag_.count(a)) continue;
      OperatorPtr op = combine(1.0, problem_->mass_ptr(), -dt_ * a, problem_->op_ptr());
      diag_.emplace(a, build_inner_preconditioner(opt_.inner, op));
    }
  }

  StepResult advance(const Vector& u_n, double t_n) const {
    const auto& P = *problem_;
    const Index N = P.size();
    const int s = tableau_.s;
    Vector rhs(N * s), Lu(N), fi(N);
    P.op().apply(u_n, Lu);
    for (int i = 0; i < s; ++i) {
      P.stage_rhs(t_n + dt_ * tableau_.c0[i], Lu, fi);
      rhs.segment(i * N, N) = fi;
    }
    StageOperator K(*this);
    BlockTriangular B(*this);
    KrylovConfig cfg = opt_.outer;
    cfg.method = opt_.inner.kind == InnerKind::InnerKrylov ? KrylovMethod::FGMRES
                                                           : KrylovMethod::GMRES;
    auto res = solve(K, rhs, B, cfg);
    if (!res.report.converged) throw FactorSolveFailure(0, res.report);
    StepResult out;
    out.u = u_n;
    for (int i = 0; i < s; ++i) out.u += dt_ * tableau_.b0[i] * res.x.segment(i * N, N);
    out.reports.push_back(std::move(res.report));
    out.work_vectors = 3 * s + 2;
    return out;
  }

  const Matrix& splitting() const { return split_; }

 private:
  class StageOperator final : public LinearOperator {
   public:
    explicit StageOperator(const BlockPrecStepper& st) : st_(st) {}
    Index size() const override { return st_.problem_->size() * st_.tableau_.s; }
    void apply(const Vector& x, Vector& y) const override {
      const auto& P = *st_.problem_;
      const Index N = P.size();
      const int s = st_.tableau_.s;
      std::vector<Vector> Lx(static_cast<std::size_t>(s), Vector(N));
      for (int j = 0; j < s; ++j) P.op().apply(x.segment(j * N, N), Lx[static_cast<std::size_t>(j)]);
      y.resize(size());
      Vector Mx(N);
      for (int i = 0; i < s; ++i) {
        P.mass().apply(x.segment(i * N, N), Mx);
        for (int j = 0; j < s; ++j) Mx -= st_.dt_ * st_.tableau_.A0(i, j) * Lx[static_cast<std::size_t>(j)];
        y.segment(i * N, N) = Mx;
      }
    }

   private:
    const BlockPrecStepper& st_;
  };

  class BlockTriangular final : public Preconditioner {
   public:
    explicit BlockTriangular(const BlockPrecStepper& st) : st_(st) {}
    Index size() const override { return st_.problem_->size() * st_.tableau_.s; }
    long apply(const Vector& r, Vector& z) const override {
      const auto& P = *st_.problem_;
      const Index N = P.size();
      const int s = st_.tableau_.s;
      std::vector<Vector> Lz(static_cast<std::size_t>(s), Vector(N));
      z.resize(size());
      Vector rhs(N), zi(N);
      long apps = 0;
      for (int i = 0; i < s; ++i) {
        rhs = r.segment(i * N, N);
        for (int j = 0; j < i; ++j)
          rhs += st_.dt_ * st_.split_(i, j) * Lz[static_cast<std::size_t>(j)];
        apps += st_.diag_.at(st_.split_(i, i))->apply(rhs, zi);
        z.segment(i * N, N) = zi;
        P.op().apply(zi, Lz[static_cast<std::size_t>(i)]);
      }
      return apps;
    }
    bool is_variable() const override { return st_.opt_.inner.kind == InnerKind::InnerKrylov; }

   private:
    const BlockPrecStepper& st_;
  };

  ButcherTableau tableau_;
  std::shared_ptr<const LinearProblem> problem_;
  double dt_;
  BlockVariant variant_;
  StepperOptions opt_;
  Matrix split_;
  std::map<double, InnerPtr> diag_;
};

/// One-shot wrappers with the signatures of the stepping operations.
inline StepResult sdirk_advance(const ButcherTableau& t, std::shared_ptr<const LinearProblem> p,
                                const Vector& u_n, double t_n, double dt,
                                const StepperOptions& opt = {}) {
  return SdirkStepper(t, std::move(p), dt, opt).advance(u_n, t_n);
}

inline StepResult block_prec_advance(const ButcherTableau& t,
                                     std::shared_ptr<const LinearProblem> p, const Vector& u_n,
                                     double t_n, double dt, BlockVariant variant,
                                     const StepperOptions& opt = {}) {
  return BlockPrecStepper(t, std::move(p), dt, variant, opt).advance(u_n, t_n);
}

}  // namespace irkprec

#endif  // IRKPREC_STEPPER_HPP
