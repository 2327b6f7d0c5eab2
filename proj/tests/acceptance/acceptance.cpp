// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stdd/decomposition.hpp"
#include "stdd/errors.hpp"
#include "stdd/experiment.hpp"
#include "stdd/iteration.hpp"
#include "stdd/model.hpp"
#include "stdd/operators.hpp"
#include "stdd/reference.hpp"
#include "stdd/resolvent.hpp"

using namespace stdd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Problem1D {
  int cells = 64;
  int steps = 32;
  double p = 3.0;
  double lambda = 1.0;
  std::function<double(const Vec2&)> gamma = constant_gamma(1.0);
  int q = 2;
  double overlap = 0.2;
  bool manufactured = true;
};

DiscreteOperatorContext make_context(const Problem1D& pb) {
  Mesh mesh = build_mesh({1, {1.0}, {pb.cells}});
  PStructureModel model = make_p_laplace(pb.p, pb.lambda, pb.gamma);
  if (pb.manufactured) model.source = manufactured_rhs(model, cosine_solution(1), mesh, 1.0);
  Decomposition dec = build_decomposition(mesh, pb.q, pb.overlap, 0.1);
  return DiscreteOperatorContext(std::move(mesh), std::move(model), std::move(dec), TimeGrid{1.0, pb.steps});
}

SpaceTimeField random_field(const DiscreteOperatorContext& ctx, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  SpaceTimeField u = ctx.zero_field();
  for (double& v : u.values()) v = d(rng);
  return u;
}

// 1. Sum of extended subdomain residuals equals the global residual.
Outcome decomposition_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ctx = make_context({});
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int f = 0; f < 20; ++f) {
    const SpaceTimeField u = random_field(ctx, rng, 2.0);
    const SpaceTimeField full = apply_F(ctx, RegionId::global(), u);
    SpaceTimeField sum = ctx.zero_field();
    for (int l = 0; l < 2; ++l) {
      const auto& dec = ctx.decomposition();
      sum += extend_field(dec, l, apply_F(ctx, RegionId::subdomain(l), restrict_field(dec, l, u)));
    }
    double scale = 0.0;
    for (double v : full.values()) scale = std::max(scale, std::abs(v));
    worst = std::max(worst, max_abs_diff(sum, full) / scale);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-11 && secs < 5.0,
          fmt("max relative error %.3e over 20 fields (limit 1e-11), %.2f s (limit 5 s)", worst, secs)};
}

// 2. ||R g1 - R g2|| <= (1 + 1e-8) ||g1 - g2|| / s.
Outcome resolvent_nonexpansive() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::mt19937_64 rng(202);
  for (double p : {2.0, 3.0}) {
    Problem1D pb;
    pb.cells = 32;
    pb.steps = 16;
    pb.p = p;
    const auto ctx = make_context(pb);
    for (double s : {0.5, 2.0, 10.0}) {
      ResolventConfig cfg;
      cfg.s = s;
      for (int pair = 0; pair < 50; ++pair) {
        const int l = pair % 2;
        const SpaceTimeField g1 = random_field(ctx, rng, 3.0);
        const SpaceTimeField g2 = random_field(ctx, rng, 3.0);
        const double ratio = s * h_norm(ctx, resolvent_solve(ctx, l, cfg, g1) - resolvent_solve(ctx, l, cfg, g2)) /
                             h_norm(ctx, g1 - g2);
        worst = std::max(worst, ratio);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1 + 1e-8 && secs < 60.0,
          fmt("max s*||dR||/||dg|| = %.6f over 300 pairs (limit 1 + 1e-8), %.1f s (limit 60 s)", worst, secs)};
}

// 3. PR monotone decrease of ||v^n - v||^2 and decay of sum k_l for PR and DR with s = 1.
Outcome splitting_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ctx = make_context({});
  const SpaceTimeField u_h = solve_monolithic(ctx);
  SchemeConfig cfg;
  cfg.s = 1.0;
  cfg.max_sweeps = 6000;
  cfg.stop_tol = 0.0;
  cfg.record_wall_time = false;

  cfg.scheme = Scheme::pr;
  const RunResult pr = run_scheme(ctx, cfg, &u_h);
  const double v0 = pr.trace.initial_v_norm;
  const double slack = 1e-10 * (1 + v0 * v0);
  int violations = 0;
  double prev = v0 * v0;
  for (std::size_t n = 0; n < 100 && n < pr.trace.rows.size(); ++n) {
    const double cur = std::pow(pr.trace.rows[n].pr_v_norm.value(), 2);
    if (cur > prev + slack) ++violations;
    prev = cur;
  }
  const double pr_k = pr.trace.rows.back().err_k_total;

  cfg.scheme = Scheme::dr;
  const RunResult dr = run_scheme(ctx, cfg, &u_h);
  const double dr_k = dr.trace.rows.back().err_k_total;
  const double secs = seconds_since(t0);
  const bool pass = violations == 0 && pr_k <= 1e-8 && dr_k <= 1e-8 && secs < 120.0;
  return {pass, fmt("PR: %d increases of ||v^n-v||^2 in 100 sweeps (%d flagged over %d), sum k = %.3e; "
                    "DR: sum k = %.3e (limit 1e-8 after %d sweeps), %.1f s (limit 120 s)",
                    violations, pr.trace.monotone_violations, pr.sweeps, pr_k, dr_k, dr.sweeps, secs)};
}

// 4. PR and DR started at u_h stay there. The resolvent stops once the level
// residual is below tau = abs + rel (|M rhs|_* + |load|_*); since the level
// operator is strongly monotone with modulus s in the lumped mass norm, that
// leaves at most tau / s in the solution. Each level is compared against 10x this.
Outcome equilibrium() {
  const auto ctx = make_context({});
  NewtonOptions newton;
  const SpaceTimeField u_h = solve_monolithic(ctx, newton);
  ResolventConfig rc;
  rc.s = 1.0;
  rc.newton = newton;

  // right-hand sides of the two subdomain solves at equilibrium: s u_h -/+ M^{-1} F_2 u_h
  const SpaceTimeField f2 = apply_F_h(ctx, RegionId::subdomain(1), u_h);
  const SpaceTimeField rhs[2] = {rc.s * u_h - f2, rc.s * u_h + f2};
  const auto& m = ctx.region(RegionId::global()).lumped_mass;
  std::vector<double> tau(static_cast<std::size_t>(ctx.time_grid().steps) + 1, 0.0);
  for (int k = 1; k <= ctx.time_grid().steps; ++k) {
    for (int l = 0; l < 2; ++l) {
      const Region& r = ctx.region(RegionId::subdomain(l));
      double mrhs = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double v = rhs[l](k, static_cast<std::size_t>(r.nodes[i]));
        mrhs += r.lumped_mass[i] * v * v;
      }
      const double t = newton.abs_tol +
                       newton.rel_tol * (std::sqrt(mrhs) + dual_norm(source_load(ctx, RegionId::subdomain(l), k),
                                                                     r.lumped_mass));
      tau[static_cast<std::size_t>(k)] = std::max(tau[static_cast<std::size_t>(k)], t);
    }
  }

  double worst_ratio = 0.0;
  double worst_abs = 0.0;
  SplittingState pr = make_splitting_state(ctx, u_h);
  SplittingState dr = pr;
  for (int n = 0; n < 10; ++n) {
    pr = pr_sweep(ctx, pr, rc);
    dr = dr_sweep(ctx, dr, rc);
    for (const SpaceTimeField* u : {&pr.u1, &pr.u2, &dr.u1, &dr.u2}) {
      worst_abs = std::max(worst_abs, max_abs_diff(*u, u_h));
      for (int k = 1; k <= u->steps(); ++k) {
        double e2 = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) e2 += m[i] * std::pow((*u)(k, i) - u_h(k, i), 2);
        worst_ratio = std::max(worst_ratio, std::sqrt(e2) / (tau[static_cast<std::size_t>(k)] / rc.s));
      }
    }
  }
  return {worst_ratio <= 10.0,
          fmt("max level error / (tau/s) = %.3f over 10 sweeps (limit 10); max |u^n - u_h| = %.2e", worst_ratio,
              worst_abs)};
}

// 5. Shifted AS: error decreases with N and stays under the envelope.
Outcome shifted_additive() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (int q : {2, 3}) {
    Problem1D pb;
    pb.cells = 32;
    pb.steps = 16;
    pb.p = 2.0;
    pb.lambda = 0.0;
    pb.q = q;
    const auto ctx = make_context(pb);
    const SpaceTimeField u_h = solve_monolithic(ctx);
    const PStructureModel hat = shift_model(ctx.model(), ctx.mesh(), q);
    const DiscreteOperatorContext hctx(ctx.mesh(), hat, ctx.decomposition(), ctx.time_grid());
    const SpaceTimeField uh_hat = shift_field(u_h, q);
    const double c = hat.constants.c_mono;
    double prev = std::numeric_limits<double>::infinity();
    detail += fmt("q=%d (c=%g):", q, c);
    for (int N : {16, 64, 256}) {
      SchemeConfig cfg;
      cfg.scheme = Scheme::as_shifted;
      cfg.s = std::sqrt(static_cast<double>(N));
      cfg.max_sweeps = N;
      cfg.stop_tol = 0.0;
      cfg.threads = q;
      cfg.record_wall_time = false;
      const RunResult r = run_scheme(ctx, cfg, &u_h);
      const double err = h_norm(ctx, r.u - u_h);
      const double measured = std::pow(h_norm(hctx, shift_field(r.u, q) - uh_hat), 2);
      const double bound = as_envelope(hctx, hctx.zero_field(), uh_hat, *cfg.s, N, c);
      const bool ok = err < prev && measured <= bound;
      pass = pass && ok;
      detail += fmt(" N=%d err=%.3e (shifted %.3e <= %.3e)%s", N, err, measured, bound, ok ? "" : " !");
      prev = err;
    }
    detail += ";";
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 600.0;
  return {pass, detail + fmt(" %.1f s (limit 600 s)", secs)};
}

// 6. Capacity vanishing on half the domain.
Outcome degenerate() {
  Problem1D pb;
  pb.cells = 16;
  pb.steps = 16;
  pb.gamma = indicator_gamma(1.0, 0.0, 0.5);
  const auto ctx = make_context(pb);
  MonolithicStats ms;
  const SpaceTimeField u_h = solve_monolithic(ctx, {}, {}, nullptr, &ms);
  SchemeConfig cfg;
  cfg.scheme = Scheme::pr;
  cfg.s = 80.0;
  cfg.max_sweeps = 200;
  cfg.stop_tol = 0.0;
  cfg.record_wall_time = false;
  const RunResult r = run_scheme(ctx, cfg, &u_h);
  const double err = r.trace.rows.back().err_H;
  return {err <= 1e-6 && u_h.all_finite(),
          fmt("monolithic residual %.2e (%d Newton steps), PR err_H = %.3e after %d sweeps (limit 1e-6)",
              ms.max_residual, ms.newton_iterations, err, r.sweeps)};
}

// 7. Weight and product invariants on 1D and 8 x 8 2D decompositions.
Outcome invariants() {
  double worst = 0.0;
  std::string detail;
  std::mt19937_64 rng(707);
  for (int dim : {1, 2}) {
    const Mesh mesh = dim == 1 ? build_mesh({1, {1.0}, {64}}) : build_mesh({2, {1.0, 1.0}, {8, 8}});
    PStructureModel model = make_p_laplace(3.0, 1.0, [](const Vec2& x) { return 1.0 + x.x * x.y + 0.5 * x.x; });
    Decomposition dec = build_decomposition(mesh, 2, 0.25, 0.1);
    const DiscreteOperatorContext ctx(mesh, model, dec, TimeGrid{1.0, 8});
    const double pou = partition_of_unity_error(ctx);
    const double adj = adjointness_error(ctx, 100, rng);
    const double cap = capacity_reconstruction_error(ctx);
    worst = std::max({worst, pou, adj, cap});
    detail += fmt("%dD: unity %.2e, adjoint %.2e, capacity %.2e; ", dim, pou, adj, cap);
  }
  return {worst <= 1e-12, detail + "limit 1e-12"};
}

// 8. Sampling of the structure conditions.
Outcome p_structure() {
  bool pass = true;
  std::string detail;
  StructureSampler sampler;
  sampler.num_samples = 10000;
  for (double p : {2.0, 3.0, 4.0}) {
    const StructureReport r = check_p_structure(make_p_laplace(p, 1.0, constant_gamma(1.0)), sampler);
    pass = pass && r.passed;
    detail += fmt("p=%g %s (min slack %.1e); ", p, r.passed ? "holds" : "fails",
                  std::min({r.continuity, r.growth, r.monotonicity, r.coercivity}));
  }
  const StructureReport bad = check_p_structure(make_anti_monotone(constant_gamma(1.0)), sampler);
  pass = pass && !bad.passed;
  detail += fmt("anti-monotone %s (monotonicity slack %.2f)", bad.passed ? "holds" : "fails", bad.monotonicity);
  return {pass, detail};
}

double refinement_error(const ManufacturedSolution& sol, int cells, int steps) {
  const Mesh mesh = build_mesh({1, {1.0}, {cells}});
  PStructureModel model = make_p_laplace(2.0, 1.0, constant_gamma(1.0));
  model.source = manufactured_rhs(model, sol, mesh, 1.0);
  Decomposition dec = build_decomposition(mesh, 2, 0.25, 0.1);
  const DiscreteOperatorContext ctx(mesh, model, dec, TimeGrid{1.0, steps});
  return h_norm(ctx, solve_monolithic(ctx) - interpolate(ctx.mesh(), ctx.time_grid(), sol.u));
}

// 9. Discretization error under simultaneous refinement of h and dt.
Outcome discretization() {
  std::vector<double> e;
  std::vector<double> lin;
  for (int level = 0; level < 4; ++level) {
    e.push_back(refinement_error(sine_time_solution(1), 16 << level, 8 << level));
    lin.push_back(refinement_error(cosine_solution(1), 16 << level, 8 << level));
  }
  bool pass = true;
  double min_order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < e.size(); ++i) {
    pass = pass && e[i] < e[i - 1] && lin[i] < lin[i - 1];
    min_order = std::min(min_order, std::log2(e[i - 1] / e[i]));
  }
  pass = pass && min_order >= 0.8;
  return {pass, fmt("sin(t)cos(pi x): %.2e %.2e %.2e %.2e, min order %.2f (limit 0.8); "
                    "t cos(pi x): %.2e %.2e %.2e %.2e",
                    e[0], e[1], e[2], e[3], min_order, lin[0], lin[1], lin[2], lin[3])};
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell.empty() ? 0.0 : std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

// 10. CLI AS runs with 1 and 4 threads give the same trace.
Outcome thread_determinism() {
  const fs::path dir = fs::temp_directory_path() / "stdd_acceptance_threads";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "as.json") << R"({
  "mesh": {"dim": 1, "extent": [1.0], "cells": [48]},
  "time": {"T": 1.0, "steps": 16},
  "model": {"name": "p_laplace", "p": 3, "lambda": 1},
  "source": {"name": "manufactured_cos"},
  "decomposition": {"q": 3, "overlap_fraction": 0.125, "c_min": 0.1},
  "scheme": {"name": "AS", "s": 5.0, "max_sweeps": 30, "stop_tol": 0},
  "output": {"csv_path": "trace.csv", "record_wall_time": false},
  "rng_seed": 10
})";
  std::vector<std::vector<std::vector<double>>> traces;
  for (int threads : {1, 4}) {
    const std::string cmd = "cd " + dir.string() + " && " + STDD_CLI_PATH + " run as.json --threads " +
                            std::to_string(threads) + " > log.txt 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      return {false, fmt("stdd run --threads %d failed with status %d", threads, status)};
    }
    traces.push_back(read_csv(dir / "trace.csv"));
  }
  fs::remove_all(dir);
  double worst = 0.0;
  bool same_shape = traces[0].size() == traces[1].size() && !traces[0].empty();
  for (std::size_t r = 0; same_shape && r < traces[0].size(); ++r) {
    same_shape = traces[0][r].size() == traces[1][r].size();
    for (std::size_t c = 0; same_shape && c < traces[0][r].size(); ++c) {
      worst = std::max(worst, std::abs(traces[0][r][c] - traces[1][r][c]));
    }
  }
  return {same_shape && worst <= 1e-14,
          fmt("%zu rows, max entry difference %.3e (limit 1e-14)", traces[0].size(), worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"decomposition identity", decomposition_identity},
      {"resolvent nonexpansiveness", resolvent_nonexpansive},
      {"PR/DR convergence with s = 1", splitting_convergence},
      {"equilibrium preservation", equilibrium},
      {"shifted additive splitting", shifted_additive},
      {"degenerate capacity", degenerate},
      {"weight and product invariants", invariants},
      {"p-structure sampling", p_structure},
      {"discretization sanity", discretization},
      {"thread determinism", thread_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("AC%-2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
