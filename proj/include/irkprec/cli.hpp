#ifndef IRKPREC_CLI_HPP
#define IRKPREC_CLI_HPP

// Command-line front end. Exit codes: 0 success, 1 a linear solve did not converge,
// 2 invalid arguments.

#include "irkprec/experiments.hpp"
#include "irkprec/spatial.hpp"
#include "irkprec/spectral.hpp"
#include "irkprec/stepper.hpp"
#include "irkprec/tableau.hpp"
#include "irkprec/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace irkprec {

namespace cli {

inline constexpr int kOk = 0;
inline constexpr int kNotConverged = 1;
inline constexpr int kBadArgs = 2;

struct Config {
  std::string family = "gauss";
  int stages = 2;
  std::string output;
  bool csv = false;  // tableau / spectrum: CSV instead of aligned text

  // cond
  std::string mode = "tight";
  int trials = 20;
  int n = 32;
  unsigned seed = 1;

  // run / compare-gamma / inner-sweep / baseline
  std::string problem = "advdiff2d";
  int nx = 0;
  std::vector<int> grids{16, 32, 64};
  int order_space = 4;
  double tf = 2.0;
  double dt_ratio = 2.0;
  std::string krylov = "auto";
  double tol = 1e-12;
  int restart = 30;
  int max_iters = 1000;
  std::string inner = "exact";
  std::string gamma_mode = "gammastar";
  std::vector<double> adv, diff;
  std::vector<int> sweeps{1, 2, 3, 5};
  std::string relax = "gs";
};

inline std::string fmt(double v) { return detail::fmt(v); }

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>) os << fmt(v[i]);
    else os << v[i];
  }
  return os.str();
}

inline Family family_of(const Config& c) {
  auto f = parse_family(c.family);
  if (!f) throw InvalidArgument("unknown family '" + c.family + "'");
  return *f;
}

inline ButcherTableau tableau_of(const Config& c) { return build_tableau(family_of(c), c.stages); }

// Resolved-config echo; every line parses back as a flag of the same subcommand.
inline void echo(std::ostream& os, const std::string& sub, const Config& c) {
  os << "# irkprec " << sub << '\n';
  auto kv = [&](const char* k, const std::string& v) { os << "# --" << k << '=' << v << '\n'; };
  kv("family", c.family);
  kv("stages", std::to_string(c.stages));
  if ((sub == "tableau" || sub == "spectrum") && c.csv) os << "# --csv\n";
  if (sub == "cond") {
    kv("mode", c.mode);
    if (c.mode == "random") {
      kv("trials", std::to_string(c.trials));
      kv("n", std::to_string(c.n));
      kv("seed", std::to_string(c.seed));
    }
  }
  if (sub == "run" || sub == "compare-gamma" || sub == "inner-sweep" || sub == "baseline") {
    kv("problem", c.problem);
    kv("grids", join(c.grids));
    kv("order-space", std::to_string(c.order_space));
    kv("tf", fmt(c.tf));
    kv("dt-ratio", fmt(c.dt_ratio));
    kv("krylov", c.krylov);
    kv("tol", fmt(c.tol));
    kv("restart", std::to_string(c.restart));
    kv("max-iters", std::to_string(c.max_iters));
    kv("inner", c.inner);
    if (sub != "compare-gamma") kv("gamma-mode", c.gamma_mode);
    kv("adv", join(c.adv.empty() ? default_advection(c.problem) : c.adv));
    kv("diff", join(c.diff.empty() ? default_diffusion(c.problem) : c.diff));
    if (sub == "inner-sweep") {
      kv("sweeps", join(c.sweeps));
      kv("relax", c.relax);
    }
  }
}

inline ExperimentSpec experiment_of(const Config& c) {
  ExperimentSpec s;
  if (!is_known_problem(c.problem)) throw InvalidArgument("unknown problem '" + c.problem + "'");
  s.problem.id = c.problem;
  s.problem.order_space = c.order_space;
  s.problem.adv = c.adv;
  s.problem.diff = c.diff;
  s.family = family_of(c);
  s.stages = c.stages;
  s.grids = c.grids;
  s.tf = c.tf;
  s.dt_ratio = c.dt_ratio;
  auto& o = s.stepper;
  o.outer.rel_tol = c.tol;
  o.outer.restart = c.restart;
  o.outer.max_iters = c.max_iters;
  if (c.krylov == "auto") o.auto_method = true;
  else {
    o.auto_method = false;
    if (c.krylov == "cg") o.outer.method = KrylovMethod::CG;
    else if (c.krylov == "gmres") o.outer.method = KrylovMethod::GMRES;
    else if (c.krylov == "fgmres") o.outer.method = KrylovMethod::FGMRES;
    else throw InvalidArgument("unknown Krylov method '" + c.krylov + "'");
  }
  auto in = parse_inner(c.inner);
  if (!in) throw InvalidArgument("invalid inner preconditioner '" + c.inner + "'");
  o.inner = *in;
  if (c.gamma_mode == "gammastar") o.gamma_mode = GammaMode::GammaStar;
  else if (c.gamma_mode == "eta") o.gamma_mode = GammaMode::Eta;
  else throw InvalidArgument("unknown gamma mode '" + c.gamma_mode + "'");
  s.validate();
  return s;
}

inline bool all_converged(const std::vector<RunRecord>& recs) {
  for (const auto& r : recs)
    if (!r.converged) return false;
  return true;
}

using Table = std::vector<std::vector<std::string>>;

inline void emit(std::ostream& os, const Table& rows, bool csv) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (width.size() <= j) width.push_back(0);
      width[j] = std::max(width[j], r[j].size());
    }
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (csv) os << (j ? "," : "") << r[j];
      else if (j + 1 == r.size()) os << r[j];
      else os << r[j] << std::string(width[j] - r[j].size() + 2, ' ');
    }
    os << '\n';
  }
}

inline int cmd_tableau(const Config& c, std::ostream& os) {
  const auto t = tableau_of(c);
  Table rows{{"name", t.name()}, {"order", std::to_string(t.order)}};
  for (Index i = 0; i < t.s; ++i) {
    rows.push_back({"A0[" + std::to_string(i) + "]"});
    for (Index j = 0; j < t.s; ++j) rows.back().push_back(fmt(t.A0(i, j)));
  }
  rows.push_back({"b0"});
  for (Index i = 0; i < t.s; ++i) rows.back().push_back(fmt(t.b0[i]));
  rows.push_back({"c0"});
  for (Index i = 0; i < t.s; ++i) rows.back().push_back(fmt(t.c0[i]));
  emit(os, rows, c.csv);
  Table checks{{"check", "residual", "tolerance", "passed"}};
  for (const auto& ch : validate_tableau(t).checks)
    checks.push_back({ch.name, fmt(ch.residual), fmt(ch.tolerance), ch.passed ? "1" : "0"});
  emit(os, checks, c.csv);
  return kOk;
}

inline int cmd_spectrum(const Config& c, std::ostream& os) {
  const auto t = tableau_of(c);
  const auto sd = spectral_decompose(t);
  Table rows{{"factor", "kind", "eta", "beta", "gamma_star", "kappa_bound"}};
  const auto fl = factor_list(sd);
  for (std::size_t k = 0; k < fl.size(); ++k)
    rows.push_back({std::to_string(k), fl[k].kind == FactorKind::Quadratic ? "quadratic" : "linear",
                    fmt(fl[k].pair.eta), fmt(fl[k].pair.beta), fmt(fl[k].pair.gamma_star),
                    fmt(fl[k].pair.kappa_bound)});
  emit(os, rows, c.csv);
  auto coeffs = [](const Vector& v) { return join(std::vector<double>(v.data(), v.data() + v.size())); };
  os << "# char_poly ascending: " << coeffs(sd.char_poly) << '\n';
  const auto R = adjugate_row_polynomials(t);
  for (int i = 0; i < R.stages(); ++i)
    os << "# R[" << i << "] ascending: " << coeffs(R.R[std::size_t(i)]) << '\n';
  return kOk;
}

inline int cmd_cond(const Config& c, std::ostream& os) {
  const auto sd = spectral_decompose(tableau_of(c));
  const auto fl = factor_list(sd);
  if (c.mode == "tight" || c.mode == "random") {
    os << "factor,eta,beta,gamma,kappa_measured,kappa_bound\n";
    std::mt19937_64 rng(c.seed);
    const int reps = c.mode == "tight" ? 1 : c.trials;
    for (int trial = 0; trial < reps; ++trial) {
      const Matrix Lr = c.mode == "random" ? random_stable_matrix(c.n, rng) : Matrix();
      for (std::size_t k = 0; k < fl.size(); ++k) {
        const auto& p = fl[k].pair;
        const Matrix L = c.mode == "tight" ? tight_matrix(p.eta, p.beta) : Lr;
        const auto r = compute_kappa(L, p.eta, p.beta, p.gamma_star, p.gamma_star);
        os << k << ',' << fmt(p.eta) << ',' << fmt(p.beta) << ',' << fmt(p.gamma_star) << ','
           << fmt(r.kappa_measured) << ',' << fmt(r.kappa_bound) << '\n';
      }
    }
    return kOk;
  }
  if (c.mode == "scan") {
    os << "factor,eta,beta,gamma,xi,H\n";
    for (std::size_t k = 0; k < fl.size(); ++k) {
      const auto& p = fl[k].pair;
      std::vector<double> xi;
      for (int j = -40; j <= 40; ++j) xi.push_back(p.gamma_star * std::pow(10.0, j / 10.0));
      const auto H = h_scan(p.gamma_star, p.gamma_star, p.eta, p.beta, xi);
      for (std::size_t j = 0; j < xi.size(); ++j)
        os << k << ',' << fmt(p.eta) << ',' << fmt(p.beta) << ',' << fmt(p.gamma_star) << ','
           << fmt(xi[j]) << ',' << fmt(H[j]) << '\n';
    }
    return kOk;
  }
  if (c.mode == "optimality") {
    os << "factor,eta,beta,gamma,ratio,reference\n";
    for (std::size_t k = 0; k < fl.size(); ++k) {
      const auto& p = fl[k].pair;
      std::vector<double> grid;
      for (int j = 0; j < 20; ++j) grid.push_back(p.gamma_star * std::pow(2.0, -1.0 + 2.0 * j / 19.0));
      for (const auto& r : optimality_probe(p.eta, p.beta, grid))
        os << k << ',' << fmt(p.eta) << ',' << fmt(p.beta) << ',' << fmt(r.gamma) << ','
           << fmt(r.ratio) << ',' << fmt(r.reference) << '\n';
    }
    return kOk;
  }
  throw InvalidArgument("unknown cond mode '" + c.mode + "'");
}

inline int cmd_run(const Config& c, std::ostream& os) {
  const auto spec = experiment_of(c);
  const auto recs = run_convergence(spec);
  write_csv(os, to_string(spec.family), spec.stages, recs);
  const auto ord = observed_orders(recs);
  const auto ord2 = observed_orders(recs, true);
  for (std::size_t i = 0; i < ord.size(); ++i)
    os << "# observed_order," << recs[i].nx << ',' << recs[i + 1].nx << ",linf=" << fmt(ord[i])
       << ",l2=" << fmt(ord2[i]) << '\n';
  return all_converged(recs) ? kOk : kNotConverged;
}

inline int cmd_compare_gamma(const Config& c, std::ostream& os) {
  const auto spec = experiment_of(c);
  const auto cmp = run_gamma_comparison(spec);
  std::vector<RunRecord> all;
  for (std::size_t g = 0; g < cmp.eta.size(); ++g) {
    all.push_back(cmp.eta[g]);
    all.push_back(cmp.gamma_star[g]);
  }
  write_csv(os, to_string(spec.family), spec.stages, all);
  for (std::size_t g = 0; g < cmp.speedup.size(); ++g)
    for (std::size_t k = 0; k < cmp.speedup[g].size(); ++k)
      os << "# speedup,nx=" << cmp.eta[g].nx << ",factor=" << k << ','
         << fmt(cmp.speedup[g][k]) << '\n';
  return all_converged(all) ? kOk : kNotConverged;
}

inline int cmd_inner_sweep(const Config& c, std::ostream& os) {
  const auto spec = experiment_of(c);
  InnerKind kind;
  if (c.relax == "gs") kind = InnerKind::GaussSeidel;
  else if (c.relax == "jacobi") kind = InnerKind::Jacobi;
  else throw InvalidArgument("unknown relaxation '" + c.relax + "'");
  for (int k : c.sweeps)
    if (k < 1) throw InvalidArgument("sweep counts must be >= 1");
  const auto recs = run_inner_sweep(spec, c.sweeps, kind);
  write_csv(os, to_string(spec.family), spec.stages, recs);
  // Divergence at small sweep counts is an expected outcome of the study, not a failure.
  return kOk;
}

inline int cmd_baseline(const Config& c, std::ostream& os) {
  const auto spec = experiment_of(c);
  const auto recs = run_baseline_comparison(spec);
  write_csv(os, to_string(spec.family), spec.stages, recs);
  return all_converged(recs) ? kOk : kNotConverged;
}

}  // namespace cli

/// Parses argv and runs one subcommand. Results go to `out` (or --output), diagnostics to
/// `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli;
  Config c;
  CLI::App app{"Preconditioned fully implicit Runge-Kutta integration"};
  app.require_subcommand(1);

  auto scheme = [&](CLI::App* s) {
    s->add_option("--family", c.family, "gauss | radauIIA | lobattoIIIC | sdirk2l | sdirk3l | backward-euler");
    s->add_option("--stages", c.stages, "number of stages");
    s->add_option("--output", c.output, "write results here instead of standard output");
  };
  auto problem = [&](CLI::App* s) {
    scheme(s);
    s->add_option("--problem", c.problem, "advdiff1d | advdiff2d | advect1d-upwind | diffusion1d-fem");
    s->add_option("--nx", c.nx, "single grid (overrides --grids)");
    s->add_option("--grids", c.grids, "grid sizes")->delimiter(',');
    s->add_option("--order-space", c.order_space, "finite-difference order (2 or 4)");
    s->add_option("--tf", c.tf, "final time");
    s->add_option("--dt-ratio", c.dt_ratio, "dt = ratio * h");
    s->add_option("--krylov", c.krylov, "auto | cg | gmres | fgmres");
    s->add_option("--tol", c.tol, "outer relative tolerance");
    s->add_option("--restart", c.restart, "GMRES restart length");
    s->add_option("--max-iters", c.max_iters, "outer iteration limit");
    s->add_option("--inner", c.inner, "exact | banded | sparselu | jacobi:k | gs:k | krylov:tol");
    s->add_option("--adv", c.adv, "advection coefficients")->delimiter(',');
    s->add_option("--diff", c.diff, "diffusion coefficients")->delimiter(',');
  };

  auto* tab = app.add_subcommand("tableau", "print a Butcher tableau and its validation");
  scheme(tab);
  tab->add_flag("--csv", c.csv, "comma-separated output");
  auto* spec = app.add_subcommand("spectrum", "eigenvalue pairs, factors and stage polynomials");
  scheme(spec);
  spec->add_flag("--csv", c.csv, "comma-separated output");
  auto* cond = app.add_subcommand("cond", "condition numbers of the preconditioned quadratic factors");
  scheme(cond);
  cond->add_option("--mode", c.mode, "tight | random | scan | optimality");
  cond->add_option("--trials", c.trials, "random mode: number of matrices");
  cond->add_option("--n", c.n, "random mode: matrix size");
  cond->add_option("--seed", c.seed, "random mode: seed");
  auto* run = app.add_subcommand("run", "convergence study");
  problem(run);
  run->add_option("--gamma-mode", c.gamma_mode, "gammastar | eta");
  auto* cmpg = app.add_subcommand("compare-gamma", "iterations with gamma = eta versus gamma*");
  problem(cmpg);
  auto* sweep = app.add_subcommand("inner-sweep", "outer iterations versus inner relaxation sweeps");
  problem(sweep);
  sweep->add_option("--gamma-mode", c.gamma_mode, "gammastar | eta");
  sweep->add_option("--sweeps", c.sweeps, "sweep counts")->delimiter(',');
  sweep->add_option("--relax", c.relax, "gs | jacobi");
  auto* base = app.add_subcommand("baseline", "factored IRK against GSL, LD and SDIRK");
  problem(base);
  base->add_option("--gamma-mode", c.gamma_mode, "gammastar | eta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  }

  if (c.nx > 0) c.grids = {c.nx};
  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  std::ofstream file;
  if (!c.output.empty()) {
    file.open(c.output);
    if (!file) {
      err << "error: cannot open " << c.output << '\n';
      return kBadArgs;
    }
  }
  std::ostream& os = c.output.empty() ? out : file;

  try {
    std::ostringstream body;
    int code = kOk;
    if (name == "tableau") code = cmd_tableau(c, body);
    else if (name == "spectrum") code = cmd_spectrum(c, body);
    else if (name == "cond") code = cmd_cond(c, body);
    else if (name == "run") code = cmd_run(c, body);
    else if (name == "compare-gamma") code = cmd_compare_gamma(c, body);
    else if (name == "inner-sweep") code = cmd_inner_sweep(c, body);
    else if (name == "baseline") code = cmd_baseline(c, body);
    echo(os, name, c);
    os << body.str();
    if (code == kNotConverged) err << "warning: at least one linear solve did not converge\n";
    return code;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  } catch (const UnsupportedScheme& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  } catch (const UnsupportedOrder& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  } catch (const FactorSolveFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  }
}

}  // namespace irkprec

#endif  // IRKPREC_CLI_HPP
