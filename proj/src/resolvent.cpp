#include "stdd/resolvent.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stdd/errors.hpp"

namespace stdd {

void NewtonOptions::validate() const {
  if (max_iters < 1) throw ConfigError("newton.max_iters must be >= 1");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ConfigError("newton tolerances must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("newton.damping must lie in (0, 1]");
  if (!(epsilon_reg >= 0.0)) throw ConfigError("newton.epsilon_reg must be >= 0");
}

void ResolventConfig::validate() const {
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("resolvent parameter s must be > 0");
  newton.validate();
  linear.validate();
}

double dual_norm(std::span<const double> r, std::span<const double> lumped_mass) {
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += r[i] * r[i] / lumped_mass[i];
  return std::sqrt(sum);
}

namespace {

struct LevelProblem {
  const DiscreteOperatorContext& ctx;
  RegionId id;
  int k;
  const Region& region;
  std::vector<double> diag;   // s m + (kappa/dt + sigma) C
  std::vector<double> known;  // m rhs + kappa C u_prev / dt - f

  std::vector<double> residual(std::span<const double> u) const {
    std::vector<double> r = apply_A(ctx, id, k, u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += diag[i] * u[i] - known[i];
    return r;
  }
  // Residual norm, +inf if the trial point leaves the admissible range.
  double trial_norm(std::span<const double> u, std::vector<double>& r) const {
    try {
      r = residual(u);
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
    const double n = dual_norm(r, region.lumped_mass);
    return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
  }
};

}  // namespace

LevelSolve newton_time_step(const DiscreteOperatorContext& ctx, RegionId id, double s, int k,
                            std::span<const double> u_prev, std::span<const double> rhs,
                            const NewtonOptions& newton, const LinearOptions& linear,
                            std::span<const double> initial_guess) {
  const Region& r = ctx.region(id);
  const std::size_t n = r.size();
  if (u_prev.size() != n || rhs.size() != n || (!initial_guess.empty() && initial_guess.size() != n)) {
    throw ContractError("newton_time_step: vector sizes do not match the region");
  }
  const double dt = ctx.time_grid().dt();
  const double cap = ctx.capacity_scale() / dt + ctx.shift_coefficient();

  LevelProblem prob{ctx, id, k, r, std::vector<double>(n), std::vector<double>(n)};
  const std::vector<double> load = source_load(ctx, id, k);
  std::vector<double> mrhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(rhs[i]) || !std::isfinite(u_prev[i])) throw NumericError("non-finite resolvent data");
    mrhs[i] = r.lumped_mass[i] * rhs[i];
    prob.diag[i] = s * r.lumped_mass[i] + cap * r.capacity_mass[i];
    prob.known[i] = mrhs[i] + ctx.capacity_scale() * r.capacity_mass[i] * u_prev[i] / dt - load[i];
  }

  LevelSolve out;
  out.tolerance = newton.abs_tol + newton.rel_tol * (dual_norm(mrhs, r.lumped_mass) +
                                                      dual_norm(load, r.lumped_mass));
  out.u.assign(initial_guess.empty() ? u_prev.begin() : initial_guess.begin(),
               initial_guess.empty() ? u_prev.end() : initial_guess.end());

  std::vector<double> res;
  double rn = prob.trial_norm(out.u, res);
  if (!std::isfinite(rn)) {
    // bad warm start; fall back to zero
    std::fill(out.u.begin(), out.u.end(), 0.0);
    rn = prob.trial_norm(out.u, res);
    if (!std::isfinite(rn)) throw NumericError("resolvent residual is not finite at the initial guess");
  }

  MatrixEntries J;
  std::vector<double> trial(n);
  std::vector<double> trial_res;
  for (int it = 0; it < newton.max_iters && rn > out.tolerance; ++it) {
    ++out.iterations;
    assemble_A_linearization(ctx, id, k, out.u, newton.epsilon_reg, Linearization::newton, J);
    std::vector<double> neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = -res[i];
    const std::vector<double> du = solve_linear(J, prob.diag, neg, ctx.mesh().dim(), linear);

    double step = newton.damping;
    bool accepted = false;
    for (int halving = 0; halving <= 30; ++halving, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = out.u[i] + step * du[i];
      const double tn = prob.trial_norm(trial, trial_res);
      if (tn <= rn) {
        out.u.swap(trial);
        res.swap(trial_res);
        rn = tn;
        accepted = true;
        break;
      }
    }
    if (accepted) continue;

    // Damping exhausted: one fixed-point step with frozen secant coefficients.
    if (!ctx.model().alpha_secant || !ctx.model().beta_secant) {
      throw SolverError("Newton stalled at level " + std::to_string(k) + " (residual " +
                            std::to_string(rn) + ") and the model has no secant form",
                        rn);
    }
    ++out.picard_steps;
    assemble_A_linearization(ctx, id, k, out.u, newton.epsilon_reg, Linearization::secant, J);
    out.u = solve_linear(J, prob.diag, prob.known, ctx.mesh().dim(), linear);
    rn = prob.trial_norm(out.u, res);
    if (!std::isfinite(rn)) throw SolverError("Picard step produced a non-finite residual", rn);
  }
  out.residual = rn;
  if (!(rn <= out.tolerance)) {
    throw SolverError("Newton did not converge at level " + std::to_string(k) + ": residual " +
                          std::to_string(rn) + " > tolerance " + std::to_string(out.tolerance),
                      rn);
  }
  return out;
}

SpaceTimeField resolvent_solve(const DiscreteOperatorContext& ctx, int l, const ResolventConfig& cfg,
                               const SpaceTimeField& g, const SpaceTimeField* initial_guess,
                               ResolventStats* stats) {
  cfg.validate();
  if (g.num_nodes() != ctx.num_nodes() || !(g.grid() == ctx.time_grid())) {
    throw ContractError("resolvent_solve expects a global field on the context's time grid");
  }
  if (!g.all_finite()) throw NumericError("resolvent_solve: right-hand side is not finite");
  if (initial_guess != nullptr) g.require_compatible(*initial_guess);
  const RegionId id = RegionId::subdomain(l);
  const Region& r = ctx.region(id);
  const std::size_t n = r.size();

  SpaceTimeField u = (1.0 / cfg.s) * g;
  std::vector<double> prev(n, 0.0);
  std::vector<double> rhs(n);
  std::vector<double> guess(n);
  ResolventStats local;
  for (int k = 1; k <= g.steps(); ++k) {
    const auto gk = g.level(k);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = gk[static_cast<std::size_t>(r.nodes[i])];
    if (initial_guess != nullptr) {
      const auto ik = initial_guess->level(k);
      for (std::size_t i = 0; i < n; ++i) guess[i] = ik[static_cast<std::size_t>(r.nodes[i])];
    } else {
      guess = prev;
    }
    LevelSolve ls = newton_time_step(ctx, id, cfg.s, k, prev, rhs, cfg.newton, cfg.linear, guess);
    local.newton_iterations += ls.iterations;
    local.picard_steps += ls.picard_steps;
    local.max_residual = std::max(local.max_residual, ls.residual);
    auto uk = u.level(k);
    for (std::size_t i = 0; i < n; ++i) uk[static_cast<std::size_t>(r.nodes[i])] = ls.u[i];
    prev = std::move(ls.u);
  }
  if (stats != nullptr) *stats = local;
  return u;
}

}  // namespace stdd
