#ifndef STDD_RESOLVENT_HPP
#define STDD_RESOLVENT_HPP

#include <span>
#include <vector>

#include "stdd/field.hpp"
#include "stdd/linear_solve.hpp"
#include "stdd/operators.hpp"

namespace stdd {

struct NewtonOptions {
  int max_iters = 50;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  /// Initial step length; halved up to 30 times while the residual grows.
  double damping = 1.0;
  /// Regularization of the flux derivative (Jacobian only).
  double epsilon_reg = 1e-8;

  void validate() const;
};

struct ResolventConfig {
  double s = 1.0;
  NewtonOptions newton;
  LinearOptions linear;

  void validate() const;
};

struct LevelSolve {
  std::vector<double> u;
  int iterations = 0;
  int picard_steps = 0;
  double residual = 0.0;   // final residual norm
  double tolerance = 0.0;
};

/// Residual norm used by the Newton loop: sqrt(sum_i r_i^2 / m_i).
double dual_norm(std::span<const double> r, std::span<const double> lumped_mass);

/// Solves s m u_k + kappa C (u_k - u_prev)/dt + sigma C u_k + A(t_k) u_k + f(t_k) = m rhs
/// on one region (region-local vectors; rhs in the H representation). s = 0 is allowed
/// for the monolithic problem. An empty initial guess starts from u_prev.
LevelSolve newton_time_step(const DiscreteOperatorContext& ctx, RegionId id, double s, int k,
                            std::span<const double> u_prev, std::span<const double> rhs,
                            const NewtonOptions& newton, const LinearOptions& linear,
                            std::span<const double> initial_guess = {});

struct ResolventStats {
  int newton_iterations = 0;
  int picard_steps = 0;
  double max_residual = 0.0;
};

/// u = (sI + F_l)^{-1} g for a global field g. On Omega_l the levels are marched in
/// time; elsewhere u = g / s. `initial_guess` (global, optional) warm-starts Newton.
SpaceTimeField resolvent_solve(const DiscreteOperatorContext& ctx, int l, const ResolventConfig& cfg,
                               const SpaceTimeField& g, const SpaceTimeField* initial_guess = nullptr,
                               ResolventStats* stats = nullptr);

}  // namespace stdd

#endif  // STDD_RESOLVENT_HPP
