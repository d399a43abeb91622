#ifndef IRKPREC_KRYLOV_HPP
#define IRKPREC_KRYLOV_HPP

#include "irkprec/core.hpp"
#include "irkprec/linop.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace irkprec {

/// z ~ A^-1 r. apply returns how many elementary preconditioner applications it consumed,
/// so composite and nested preconditioners report honest totals.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Index size() const = 0;
  virtual long apply(const Vector& r, Vector& z) const = 0;
  /// True when the action changes between calls (inner Krylov); requires FGMRES.
  virtual bool is_variable() const { return false; }
  virtual bool is_symmetric() const { return false; }
};

using PreconditionerPtr = std::shared_ptr<const Preconditioner>;

class IdentityPreconditioner final : public Preconditioner {
 public:
  explicit IdentityPreconditioner(Index n) : n_(n) {}
  Index size() const override { return n_; }
  long apply(const Vector& r, Vector& z) const override {
    z = r;
    return 0;
  }
  bool is_symmetric() const override { return true; }

 private:
  Index n_;
};

enum class KrylovMethod { CG, GMRES, FGMRES };

inline std::string to_string(KrylovMethod m) {
  switch (m) {
    case KrylovMethod::CG: return "cg";
    case KrylovMethod::GMRES: return "gmres";
    case KrylovMethod::FGMRES: return "fgmres";
  }
  return "unknown";
}

struct KrylovConfig {
  KrylovMethod method = KrylovMethod::GMRES;
  int restart = 30;
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  int max_iters = 1000;
  bool symmetry_probe = true;  // CG only: cheap check on 3 random vector pairs
};

struct KrylovReport {
  int iterations = 0;
  std::vector<double> residual_history;  // initial norm, then one entry per iteration
  bool converged = false;
  long preconditioner_applications = 0;
  double final_residual = 0.0;  // true ||b - Ax|| at exit
};

struct KrylovResult {
  Vector x;
  KrylovReport report;
};

namespace detail {

inline constexpr double kBreakdown = 1e-30;

inline double true_residual(const LinearOperator& A, const Vector& b, const Vector& x, Vector& r) {
  A.apply(x, r);
  r = b - r;
  return r.norm();
}

inline void probe_symmetry(const LinearOperator& A, const char* what) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  const Index n = A.size();
  Vector u(n), v(n), Au(n), Av(n);
  for (int trial = 0; trial < 3; ++trial) {
    for (Index i = 0; i < n; ++i) {
      u[i] = g(rng);
      v[i] = g(rng);
    }
    A.apply(u, Au);
    A.apply(v, Av);
    const double lhs = Au.dot(v), rhs = u.dot(Av);
    if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, Au.norm() * v.norm()))
      throw InvalidArgument(std::string("CG: ") + what + " failed the symmetry probe");
  }
}

class PreconditionerAsOperator final : public LinearOperator {
 public:
  explicit PreconditionerAsOperator(const Preconditioner& P) : P_(P) {}
  Index size() const override { return P_.size(); }
  void apply(const Vector& x, Vector& y) const override { P_.apply(x, y); }

 private:
  const Preconditioner& P_;
};

inline void cg(const LinearOperator& A, const Vector& b, const Preconditioner& P,
               const KrylovConfig& cfg, Vector& x, KrylovReport& rep) {
  if (cfg.symmetry_probe) {
    probe_symmetry(A, "operator");
    if (!P.is_variable()) probe_symmetry(PreconditionerAsOperator(P), "preconditioner");
  }
  const Index n = b.size();
  const double target = cfg.rel_tol * b.norm() + cfg.abs_tol;
  Vector r(n), z(n), p(n), Ap(n);
  double rnorm = true_residual(A, b, x, r);
  rep.residual_history.push_back(rnorm);
  if (rnorm <= target) {
    rep.converged = true;
    return;
  }
  bool fresh = true;
  double rz = 0.0;
  while (rep.iterations < cfg.max_iters) {
    if (fresh) {
      rep.preconditioner_applications += P.apply(r, z);
      p = z;
      rz = r.dot(z);
      fresh = false;
    }
    A.apply(p, Ap);
    const double pAp = p.dot(Ap);
    if (std::abs(pAp) <= kBreakdown) throw Breakdown("CG: p^T A p vanished");
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    ++rep.iterations;
    rnorm = r.norm();
    rep.residual_history.push_back(rnorm);
    if (rnorm <= target) {
      // Recursive residual says done; confirm against the true residual.
      if (true_residual(A, b, x, r) <= target) {
        rep.converged = true;
        return;
      }
      fresh = true;
      continue;
    }
    rep.preconditioner_applications += P.apply(r, z);
    const double rz_new = r.dot(z);
    if (std::abs(rz) <= kBreakdown) throw Breakdown("CG: r^T z vanished");
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
}

// Right-preconditioned restarted GMRES. With `flexible` the preconditioned basis is stored
// (FGMRES); otherwise the correction is preconditioned once per cycle.
inline void gmres(const LinearOperator& A, const Vector& b, const Preconditioner& P,
                  const KrylovConfig& cfg, bool flexible, Vector& x, KrylovReport& rep) {
  require(cfg.restart >= 1, "GMRES: restart must be >= 1");
  const Index n = b.size();
  const int m = cfg.restart;
  const double target = cfg.rel_tol * b.norm() + cfg.abs_tol;

  std::vector<Vector> V(static_cast<std::size_t>(m + 1), Vector(n));
  std::vector<Vector> Z(flexible ? static_cast<std::size_t>(m) : 0, Vector(n));
  Matrix H = Matrix::Zero(m + 1, m);
  Vector cs(m), sn(m), g(m + 1), w(n), t(n), r(n);

  double beta = true_residual(A, b, x, r);
  rep.residual_history.push_back(beta);
  if (beta <= target) {
    rep.converged = true;
    return;
  }

  while (rep.iterations < cfg.max_iters) {
    V[0] = r / beta;
    g.setZero();
    g[0] = beta;
    H.setZero();
    int j = 0;
    bool lucky = false;
    for (; j < m && rep.iterations < cfg.max_iters; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (flexible) {
        rep.preconditioner_applications += P.apply(V[ju], Z[ju]);
        A.apply(Z[ju], w);
      } else {
        rep.preconditioner_applications += P.apply(V[ju], t);
        A.apply(t, w);
      }
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V[static_cast<std::size_t>(i)]);
        w -= H(i, j) * V[static_cast<std::size_t>(i)];
      }
      H(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        const double hi = H(i, j), hk = H(i + 1, j);
        H(i, j) = cs[i] * hi + sn[i] * hk;
        H(i + 1, j) = -sn[i] * hi + cs[i] * hk;
      }
      const double h_next = H(j + 1, j);
      const double denom = std::hypot(H(j, j), h_next);
      if (denom <= kBreakdown) throw Breakdown("GMRES: Hessenberg column vanished");
      cs[j] = H(j, j) / denom;
      sn[j] = h_next / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      rep.residual_history.push_back(std::abs(g[j + 1]));
      if (h_next <= kBreakdown) {
        lucky = true;
        ++j;
        break;
      }
      V[ju + 1] = w / h_next;
      if (std::abs(g[j + 1]) <= target) {
        ++j;
        break;
      }
    }
    // Back-substitute for the j Krylov coefficients and update x.
    Vector y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    if (flexible) {
      for (int i = 0; i < j; ++i) x += y[i] * Z[static_cast<std::size_t>(i)];
    } else {
      w.setZero();
      for (int i = 0; i < j; ++i) w += y[i] * V[static_cast<std::size_t>(i)];
      rep.preconditioner_applications += P.apply(w, t);
      x += t;
    }
    beta = true_residual(A, b, x, r);
    if (beta <= target) {
      rep.converged = true;
      return;
    }
    if (lucky) throw Breakdown("GMRES: invariant subspace reached without convergence");
  }
}

}  // namespace detail

/// Solves A x = b from x0. Non-convergence within max_iters returns the last iterate with
/// converged = false; the final residual is always the recomputed true residual.
inline KrylovResult solve(const LinearOperator& A, const Vector& b, const Preconditioner& P,
                          const KrylovConfig& cfg, const Vector& x0) {
  require_same_size(A.size(), b.size(), "krylov::solve (operator/rhs)");
  require_same_size(P.size(), b.size(), "krylov::solve (preconditioner/rhs)");
  require_same_size(x0.size(), b.size(), "krylov::solve (x0/rhs)");
  require(cfg.rel_tol > 0.0, "krylov::solve: rel_tol must be positive");
  KrylovResult res{x0, {}};
  switch (cfg.method) {
    case KrylovMethod::CG: detail::cg(A, b, P, cfg, res.x, res.report); break;
    case KrylovMethod::GMRES:
      if (P.is_variable())
        throw InvalidArgument("GMRES with a variable preconditioner; use FGMRES");
      detail::gmres(A, b, P, cfg, false, res.x, res.report);
      break;
    case KrylovMethod::FGMRES: detail::gmres(A, b, P, cfg, true, res.x, res.report); break;
  }
  Vector r(b.size());
  res.report.final_residual = detail::true_residual(A, b, res.x, r);
  return res;
}

inline KrylovResult solve(const LinearOperator& A, const Vector& b, const Preconditioner& P,
                          const KrylovConfig& cfg) {
  return solve(A, b, P, cfg, Vector::Zero(b.size()));
}

}  // namespace irkprec

#endif  // IRKPREC_KRYLOV_HPP
