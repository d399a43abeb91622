#ifndef IRKPREC_SPATIAL_HPP
#define IRKPREC_SPATIAL_HPP

// Periodic finite-difference operators on [-1,1]^dim and the manufactured-solution
// problems built from them.

#include "irkprec/core.hpp"
#include "irkprec/linop.hpp"
#include "irkprec/mass.hpp"
#include "irkprec/problem.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace irkprec {

struct GridSpec {
  int dim = 1;
  int n = 32;  // points per direction

  GridSpec() = default;
  GridSpec(int dim_, int n_) : dim(dim_), n(n_) {
    require(dim == 1 || dim == 2, "GridSpec: dim must be 1 or 2");
    require(n >= 4, "GridSpec: n must be >= 4");
  }
  double h() const { return 2.0 / n; }
  Index size() const { return dim == 1 ? Index(n) : Index(n) * n; }
  double x(int i) const { return -1.0 + i * h(); }
};

namespace detail {

// Periodic stencil offsets/weights (unscaled by h).
using Stencil = std::vector<std::pair<int, double>>;

inline Stencil first_derivative_stencil(int order) {
  if (order == 2) return {{-1, -0.5}, {1, 0.5}};
  if (order == 4) return {{-2, 1.0 / 12}, {-1, -2.0 / 3}, {1, 2.0 / 3}, {2, -1.0 / 12}};
  throw UnsupportedOrder("finite-difference order " + std::to_string(order) + " (supported: 2, 4)");
}

inline Stencil second_derivative_stencil(int order) {
  if (order == 2) return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
  if (order == 4)
    return {{-2, -1.0 / 12}, {-1, 4.0 / 3}, {0, -2.5}, {1, 4.0 / 3}, {2, -1.0 / 12}};
  throw UnsupportedOrder("finite-difference order " + std::to_string(order) + " (supported: 2, 4)");
}

// Adds coef * (stencil along `axis`) to the triplet list; index = iy*n + ix.
inline void add_stencil(const GridSpec& g, int axis, const Stencil& st, double coef,
                        std::vector<Eigen::Triplet<double>>& trips) {
  const int n = g.n;
  const int ny = g.dim == 2 ? n : 1;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Index row = Index(iy) * n + ix;
      for (const auto& [off, w] : st) {
        const int jx = axis == 0 ? ((ix + off) % n + n) % n : ix;
        const int jy = axis == 1 ? ((iy + off) % n + n) % n : iy;
        trips.emplace_back(row, Index(jy) * n + jx, coef * w);
      }
    }
}

inline SparseMatrix from_triplets(Index N, const std::vector<Eigen::Triplet<double>>& trips) {
  SparseMatrix A(N, N);
  A.setFromTriplets(trips.begin(), trips.end());
  A.prune(0.0);
  A.makeCompressed();
  return A;
}

}  // namespace detail

/// L = -a . D1 + d . D2 with central periodic stencils of order 2 or 4.
inline std::shared_ptr<SparseOperator> build_advdiff(const GridSpec& g, const std::vector<double>& adv,
                                                     const std::vector<double>& diff, int order) {
  require(adv.size() == std::size_t(g.dim) && diff.size() == std::size_t(g.dim),
          "build_advdiff: one advection and one diffusion coefficient per dimension");
  const auto d1 = detail::first_derivative_stencil(order);
  const auto d2 = detail::second_derivative_stencil(order);
  const double h = g.h();
  std::vector<Eigen::Triplet<double>> trips;
  for (int axis = 0; axis < g.dim; ++axis) {
    require(diff[std::size_t(axis)] >= 0.0, "build_advdiff: diffusion must be nonnegative");
    detail::add_stencil(g, axis, d1, -adv[std::size_t(axis)] / h, trips);
    detail::add_stencil(g, axis, d2, diff[std::size_t(axis)] / (h * h), trips);
  }
  return std::make_shared<SparseOperator>(detail::from_triplets(g.size(), trips));
}

/// First-order upwind discretization of -a . grad u.
inline std::shared_ptr<SparseOperator> build_upwind_advection(const GridSpec& g,
                                                              const std::vector<double>& adv) {
  require(adv.size() == std::size_t(g.dim), "build_upwind_advection: one coefficient per dimension");
  bool nonzero = false;
  for (double a : adv) nonzero = nonzero || a != 0.0;
  require(nonzero, "build_upwind_advection: advection velocity must be nonzero");
  const double h = g.h();
  std::vector<Eigen::Triplet<double>> trips;
  for (int axis = 0; axis < g.dim; ++axis) {
    const double a = adv[std::size_t(axis)];
    if (a == 0.0) continue;
    const detail::Stencil st = a > 0 ? detail::Stencil{{-1, 1.0}, {0, -1.0}}
                                     : detail::Stencil{{0, 1.0}, {1, -1.0}};
    detail::add_stencil(g, axis, st, std::abs(a) / h, trips);
  }
  return std::make_shared<SparseOperator>(detail::from_triplets(g.size(), trips));
}

/// Periodic linear-element mass matrix, rows (h/6)[1, 4, 1].
inline std::shared_ptr<SparseMass> build_fem_mass_1d(const GridSpec& g) {
  require(g.dim == 1, "build_fem_mass_1d: 1D grids only");
  std::vector<Eigen::Triplet<double>> trips;
  detail::add_stencil(g, 0, {{-1, 1.0}, {0, 4.0}, {1, 1.0}}, g.h() / 6.0, trips);
  return std::make_shared<SparseMass>(detail::from_triplets(g.size(), trips));
}

/// u = prod_d sin^4(pi/2 (x_d - 1 - a_d t)) * exp(-sum(d) t), transported by a and damped so
/// that u_t + a . grad u - d : lap u = s has a closed-form source.
struct MMSProblem {
  GridSpec grid;
  std::vector<double> adv, diff;
  std::shared_ptr<const LinearProblem> problem;

  /// Exact solution at a point (x, y); y ignored in 1D.
  double u(double x, double y, double t) const {
    double v = std::exp(-decay() * t);
    for (int d = 0; d < grid.dim; ++d) v *= std::pow(std::sin(phase(d, d == 0 ? x : y, t)), 4);
    return v;
  }

  double source(double x, double y, double t) const {
    const double k2 = std::numbers::pi * std::numbers::pi / 4.0;
    double f[2] = {1.0, 1.0}, f2[2] = {0.0, 0.0};
    for (int d = 0; d < grid.dim; ++d) {
      const double w = phase(d, d == 0 ? x : y, t);
      const double s = std::sin(w), c = std::cos(w);
      f[d] = s * s * s * s;
      f2[d] = k2 * (12.0 * s * s * c * c - 4.0 * s * s * s * s);
    }
    const double E = std::exp(-decay() * t);
    double lap = 0.0;
    for (int d = 0; d < grid.dim; ++d) lap += diff[std::size_t(d)] * f2[d] * f[1 - d] * E;
    return -decay() * u(x, y, t) - lap;
  }

  Vector sample(double t) const {
    Vector v(grid.size());
    fill(t, v, false);
    return v;
  }

  void fill(double t, Vector& out, bool forcing) const {
    const int n = grid.n;
    const int ny = grid.dim == 2 ? n : 1;
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double x = grid.x(ix), y = grid.dim == 2 ? grid.x(iy) : 0.0;
        out[Index(iy) * n + ix] = forcing ? source(x, y, t) : u(x, y, t);
      }
  }

 private:
  double decay() const {
    double s = 0.0;
    for (int d = 0; d < grid.dim; ++d) s += diff[std::size_t(d)];
    return s;
  }
  double phase(int d, double x, double t) const {
    return std::numbers::pi / 2.0 * (x - 1.0 - adv[std::size_t(d)] * t);
  }
};

inline MMSProblem build_mms(const GridSpec& g, std::vector<double> adv, std::vector<double> diff,
                            int order) {
  MMSProblem m;
  m.grid = g;
  m.adv = std::move(adv);
  m.diff = std::move(diff);
  auto L = build_advdiff(g, m.adv, m.diff, order);
  auto self = std::make_shared<MMSProblem>(m);
  m.problem = std::make_shared<LinearProblem>(
      std::make_shared<IdentityMass>(g.size()), L,
      [self](double t, Vector& out) { self->fill(t, out, true); },
      [self](double t) { return self->sample(t); });
  return m;
}

/// 0.85 u_x + u_y = 0.3 u_xx + 0.25 u_yy + s in 2D; 0.85 u_x = 0.3 u_xx + s in 1D.
inline MMSProblem build_fd_mms(const GridSpec& g, int order) {
  if (g.dim == 2) return build_mms(g, {0.85, 1.0}, {0.3, 0.25}, order);
  return build_mms(g, {0.85}, {0.3}, order);
}

/// Problem selection shared by the experiment drivers and the command line.
struct ProblemConfig {
  std::string id = "advdiff2d";  // advdiff1d | advdiff2d | advect1d-upwind | diffusion1d-fem
  int order_space = 4;
  std::vector<double> adv;   // empty: problem default
  std::vector<double> diff;  // empty: problem default
};

inline bool is_known_problem(const std::string& id) {
  return id == "advdiff1d" || id == "advdiff2d" || id == "advect1d-upwind" ||
         id == "diffusion1d-fem";
}

inline int problem_dim(const std::string& id) { return id == "advdiff2d" ? 2 : 1; }

inline std::vector<double> default_advection(const std::string& id) {
  if (id == "advdiff2d") return {0.85, 1.0};
  if (id == "diffusion1d-fem") return {0.0};
  if (id == "advect1d-upwind") return {1.0};
  return {0.85};
}

inline std::vector<double> default_diffusion(const std::string& id) {
  if (id == "advdiff2d") return {0.3, 0.25};
  if (id == "advect1d-upwind") return {0.0};
  return {0.3};
}

/// Builds problem `cfg.id` on an n-point grid.
inline std::shared_ptr<const LinearProblem> make_problem(const ProblemConfig& cfg, int n) {
  if (!is_known_problem(cfg.id)) throw InvalidArgument("unknown problem '" + cfg.id + "'");
  const GridSpec g(problem_dim(cfg.id), n);
  const auto adv = cfg.adv.empty() ? default_advection(cfg.id) : cfg.adv;
  const auto diff = cfg.diff.empty() ? default_diffusion(cfg.id) : cfg.diff;
  require(adv.size() == std::size_t(g.dim) && diff.size() == std::size_t(g.dim),
          "coefficient count does not match problem dimension");

  if (cfg.id == "advdiff1d" || cfg.id == "advdiff2d")
    return build_mms(g, adv, diff, cfg.order_space).problem;

  if (cfg.id == "advect1d-upwind") {
    // Narrow transported Gaussian pulse (width 0.05, wrapped onto [-1, 1)). A smooth profile
    // with few Fourier modes would let GMRES finish in a handful of iterations regardless
    // of the preconditioner.
    const double a = adv[0];
    auto exact = [g, a](double t) {
      Vector v(g.size());
      for (int i = 0; i < g.n; ++i) {
        const double d = std::remainder(g.x(i) - a * t, 2.0);
        v[i] = std::exp(-d * d / (2.0 * 0.05 * 0.05));
      }
      return v;
    };
    return std::make_shared<LinearProblem>(std::make_shared<IdentityMass>(g.size()),
                                           build_upwind_advection(g, adv), Forcing{}, exact);
  }

  // diffusion1d-fem: M u' = K u with the linear-element mass and stiffness matrices.
  const double d = diff[0];
  require(d > 0.0, "diffusion1d-fem: diffusion must be positive");
  std::vector<Eigen::Triplet<double>> trips;
  detail::add_stencil(g, 0, {{-1, 1.0}, {0, -2.0}, {1, 1.0}}, d / g.h(), trips);
  auto K = std::make_shared<SparseOperator>(detail::from_triplets(g.size(), trips));
  auto exact = [g, d](double t) {
    Vector v(g.size());
    const double pi = std::numbers::pi;
    for (int i = 0; i < g.n; ++i) v[i] = std::sin(pi * g.x(i)) * std::exp(-d * pi * pi * t);
    return v;
  };
  return std::make_shared<LinearProblem>(build_fem_mass_1d(g), K, Forcing{}, exact);
}

}  // namespace irkprec

#endif  // IRKPREC_SPATIAL_HPP
