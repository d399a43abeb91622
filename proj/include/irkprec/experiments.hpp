#ifndef IRKPREC_EXPERIMENTS_HPP
#define IRKPREC_EXPERIMENTS_HPP

#include "irkprec/core.hpp"
#include "irkprec/spatial.hpp"
#include "irkprec/stepper.hpp"
#include "irkprec/tableau.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace irkprec {

struct ExperimentSpec {
  ProblemConfig problem;
  Family family = Family::Gauss;
  int stages = 2;
  std::vector<int> grids{16, 32, 64, 128};
  double tf = 2.0;
  double dt_ratio = 2.0;  // dt = dt_ratio * h, then shrunk so that steps * dt = tf
  StepperOptions stepper;

  void validate() const {
    require(!grids.empty(), "experiment: grid list is empty");
    for (std::size_t i = 1; i < grids.size(); ++i)
      require(grids[i] > grids[i - 1], "experiment: grid list must be strictly increasing");
    require(tf > 0.0, "experiment: final time must be positive");
    require(dt_ratio > 0.0, "experiment: dt ratio must be positive");
  }
};

struct FactorStats {
  int index = 0;
  double eta = 0.0, beta = 0.0, gamma = 0.0;
  long iterations = 0;  // summed over steps
  long precond_apps = 0;
  int solves = 0;
  double mean_outer_iters() const { return solves ? double(iterations) / solves : 0.0; }
};

struct RunRecord {
  std::string label;  // written to the gamma_mode column
  int nx = 0;
  double dt = 0.0;
  int steps = 0;
  double err_linf = std::numeric_limits<double>::quiet_NaN();
  double err_l2 = std::numeric_limits<double>::quiet_NaN();
  std::vector<FactorStats> factors;
  bool converged = true;
  std::string failure;
};

/// steps = ceil(tf / (ratio h)); dt = tf / steps.
inline std::pair<int, double> time_grid(double tf, double h, double ratio) {
  const int steps = std::max(1, static_cast<int>(std::ceil(tf / (ratio * h) - 1e-9)));
  return {steps, tf / steps};
}

namespace detail {

inline void measure_error(const LinearProblem& p, const Vector& u, double t, int dim, double h,
                          RunRecord& rec) {
  if (!p.has_exact()) return;
  const Vector e = u - p.exact(t);
  rec.err_linf = e.cwiseAbs().maxCoeff();
  rec.err_l2 = std::sqrt(std::pow(h, dim) * e.squaredNorm());
}

inline void accumulate(const std::vector<KrylovReport>& reports, RunRecord& rec) {
  for (std::size_t k = 0; k < reports.size() && k < rec.factors.size(); ++k) {
    rec.factors[k].iterations += reports[k].iterations;
    rec.factors[k].precond_apps += reports[k].preconditioner_applications;
    rec.factors[k].solves += 1;
  }
}

// Steps `stepper` from the exact initial state to tf, recording errors and statistics.
template <class Stepper>
void integrate_into(const Stepper& stepper, const LinearProblem& p, int steps, double dt,
                    int dim, double h, RunRecord& rec, Vector* final_u = nullptr) {
  Vector u = p.exact(0.0);
  double t = 0.0;
  try {
    for (int n = 0; n < steps; ++n) {
      StepResult r = stepper.advance(u, t);
      accumulate(r.reports, rec);
      u = std::move(r.u);
      t = (n + 1) * dt;
    }
  } catch (const FactorSolveFailure& e) {
    rec.converged = false;
    rec.failure = e.what();
    const auto k = static_cast<std::size_t>(e.factor_index());
    if (k < rec.factors.size()) {
      rec.factors[k].iterations += e.report().iterations;
      rec.factors[k].precond_apps += e.report().preconditioner_applications;
      rec.factors[k].solves += 1;
    }
    return;
  }
  measure_error(p, u, t, dim, h, rec);
  if (final_u) *final_u = u;
}

inline RunRecord make_record(const std::string& label, int nx, int steps, double dt) {
  RunRecord rec;
  rec.label = label;
  rec.nx = nx;
  rec.steps = steps;
  rec.dt = dt;
  return rec;
}

}  // namespace detail

/// Integrates with the factored IRK stepper on one grid.
inline RunRecord run_irk(const ExperimentSpec& spec, int nx, const std::string& label) {
  const auto p = make_problem(spec.problem, nx);
  const GridSpec g(problem_dim(spec.problem.id), nx);
  const auto [steps, dt] = time_grid(spec.tf, g.h(), spec.dt_ratio);
  RunRecord rec = detail::make_record(label, nx, steps, dt);
  const IRKStepper st(build_tableau(spec.family, spec.stages), p, dt, spec.stepper);
  for (std::size_t k = 0; k < st.factors().size(); ++k) {
    const auto& f = st.factors()[k];
    rec.factors.push_back({int(k), f.factor.pair.eta, f.factor.pair.beta, f.shift, 0, 0, 0});
  }
  detail::integrate_into(st, *p, steps, dt, g.dim, g.h(), rec);
  return rec;
}

/// Observed order between consecutive records: log(e_prev/e_cur) / log(n_cur/n_prev).
inline std::vector<double> observed_orders(const std::vector<RunRecord>& recs, bool use_l2 = false) {
  std::vector<double> out;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const double a = use_l2 ? recs[i - 1].err_l2 : recs[i - 1].err_linf;
    const double b = use_l2 ? recs[i].err_l2 : recs[i].err_linf;
    out.push_back(std::log(a / b) / std::log(double(recs[i].nx) / recs[i - 1].nx));
  }
  return out;
}

/// One record per grid; a non-converged run stops refinement.
inline std::vector<RunRecord> run_convergence(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<RunRecord> out;
  for (int n : spec.grids) {
    out.push_back(run_irk(spec, n, to_string(spec.stepper.gamma_mode)));
    if (!out.back().converged) break;
  }
  return out;
}

struct GammaComparison {
  std::vector<RunRecord> eta, gamma_star;  // one per grid
  /// speedup[g][k] = iterations(eta) / iterations(gamma*) for factor k on grid g.
  std::vector<std::vector<double>> speedup;
};

inline GammaComparison run_gamma_comparison(const ExperimentSpec& spec) {
  spec.validate();
  GammaComparison cmp;
  for (int n : spec.grids) {
    ExperimentSpec s = spec;
    s.stepper.gamma_mode = GammaMode::Eta;
    cmp.eta.push_back(run_irk(s, n, to_string(GammaMode::Eta)));
    s.stepper.gamma_mode = GammaMode::GammaStar;
    cmp.gamma_star.push_back(run_irk(s, n, to_string(GammaMode::GammaStar)));
    std::vector<double> sp;
    const auto& a = cmp.eta.back().factors;
    const auto& b = cmp.gamma_star.back().factors;
    for (std::size_t k = 0; k < a.size(); ++k)
      sp.push_back(b[k].iterations ? double(a[k].iterations) / double(b[k].iterations)
                                   : std::numeric_limits<double>::quiet_NaN());
    cmp.speedup.push_back(std::move(sp));
  }
  return cmp;
}

/// One record per (grid, inner spec). The exact inner solve is always included first as the
/// reference; non-converged rows are kept.
inline std::vector<RunRecord> run_inner_sweep(const ExperimentSpec& spec,
                                              const std::vector<int>& sweeps,
                                              InnerKind kind = InnerKind::GaussSeidel) {
  spec.validate();
  require(kind == InnerKind::Jacobi || kind == InnerKind::GaussSeidel,
          "inner sweep: relaxation kinds only");
  std::vector<RunRecord> out;
  for (int n : spec.grids) {
    ExperimentSpec s = spec;
    s.stepper.inner = InnerSpec{};
    out.push_back(run_irk(s, n, to_string(spec.stepper.gamma_mode) + "+exact"));
    for (int k : sweeps) {
      s.stepper.inner.kind = kind;
      s.stepper.inner.sweeps = k;
      out.push_back(
          run_irk(s, n, to_string(spec.stepper.gamma_mode) + "+" + to_string(s.stepper.inner)));
    }
  }
  return out;
}

/// IRK, GSL, LD (same tableau) and an SDIRK baseline on each grid.
inline std::vector<RunRecord> run_baseline_comparison(const ExperimentSpec& spec,
                                                      std::vector<Vector>* finals = nullptr) {
  spec.validate();
  std::vector<RunRecord> out;
  for (int n : spec.grids) {
    const auto p = make_problem(spec.problem, n);
    const GridSpec g(problem_dim(spec.problem.id), n);
    const auto [steps, dt] = time_grid(spec.tf, g.h(), spec.dt_ratio);
    const ButcherTableau tab = build_tableau(spec.family, spec.stages);

    const double nan = std::numeric_limits<double>::quiet_NaN();

    // `finals` receives the final states of the same-tableau methods (irk, gsl, ld).
    auto run = [&](const std::string& label, const auto& stepper, int nfactors, bool keep) {
      RunRecord rec = detail::make_record(label, n, steps, dt);
      for (int k = 0; k < nfactors; ++k) rec.factors.push_back({k, nan, nan, nan, 0, 0, 0});
      Vector u;
      detail::integrate_into(stepper, *p, steps, dt, g.dim, g.h(), rec, &u);
      if (keep && finals) finals->push_back(std::move(u));
      out.push_back(std::move(rec));
      return &out.back();
    };

    const IRKStepper irk(tab, p, dt, spec.stepper);
    RunRecord* r = run("irk", irk, int(irk.factors().size()), true);
    for (std::size_t k = 0; k < irk.factors().size(); ++k) {
      const auto& f = irk.factors()[k];
      r->factors[k].eta = f.factor.pair.eta;
      r->factors[k].beta = f.factor.pair.beta;
      r->factors[k].gamma = f.shift;
    }
    run("gsl", BlockPrecStepper(tab, p, dt, BlockVariant::GSL, spec.stepper), 1, true);
    run("ld", BlockPrecStepper(tab, p, dt, BlockVariant::LD, spec.stepper), 1, true);
    const ButcherTableau sd = build_tableau(spec.stages >= 3 ? Family::SDIRK3L : Family::SDIRK2L,
                                            spec.stages >= 3 ? 3 : 2);
    run("sdirk", SdirkStepper(sd, p, dt, spec.stepper), sd.s, false);
  }
  return out;
}

inline constexpr const char* kCsvHeader =
    "family,stages,gamma_mode,nx,dt,steps,err_linf,err_l2,factor_index,eta,beta,gamma,"
    "mean_outer_iters,total_precond_apps,converged";

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

}  // namespace detail

/// One line per (record, factor).
inline void write_csv(std::ostream& os, const std::string& family, int stages,
                      const std::vector<RunRecord>& recs, bool header = true) {
  if (header) os << kCsvHeader << '\n';
  for (const auto& r : recs) {
    for (const auto& f : r.factors) {
      os << family << ',' << stages << ',' << r.label << ',' << r.nx << ',' << detail::fmt(r.dt)
         << ',' << r.steps << ',' << detail::fmt(r.err_linf) << ',' << detail::fmt(r.err_l2) << ','
         << f.index << ',' << detail::fmt(f.eta) << ',' << detail::fmt(f.beta) << ','
         << detail::fmt(f.gamma) << ',' << detail::fmt(f.mean_outer_iters()) << ','
         << f.precond_apps << ',' << (r.converged ? 1 : 0) << '\n';
    }
  }
}

}  // namespace irkprec

#endif  // IRKPREC_EXPERIMENTS_HPP
