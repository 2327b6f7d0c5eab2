#ifndef STDD_REFERENCE_HPP
#define STDD_REFERENCE_HPP

#include <functional>

#include "stdd/field.hpp"
#include "stdd/model.hpp"
#include "stdd/operators.hpp"
#include "stdd/resolvent.hpp"

namespace stdd {

struct MonolithicStats {
  int newton_iterations = 0;
  int picard_steps = 0;
  double max_residual = 0.0;
};

/// Implicit Euler on the global mesh: C(u_k - u_{k-1})/dt + A(t_k)u_k + f(t_k) = 0.
SpaceTimeField solve_monolithic(const DiscreteOperatorContext& ctx, const NewtonOptions& newton = {},
                                const LinearOptions& linear = {},
                                const SpaceTimeField* initial_guess = nullptr,
                                MonolithicStats* stats = nullptr);

/// Exact solution with analytic time derivative and gradient.
struct ManufacturedSolution {
  std::function<double(const Vec2& x, double t)> u;
  std::function<double(const Vec2& x, double t)> u_t;
  std::function<Vec2(const Vec2& x, double t)> grad;
};

/// u = t cos(pi x) (times cos(pi y) in 2D).
ManufacturedSolution cosine_solution(int dim);
/// u = sin(t) cos(pi x) (times cos(pi y) in 2D); not linear in t.
ManufacturedSolution sine_time_solution(int dim);

/// eta0 = -(gamma u_t + beta(u)), eta = -alpha(grad u). Checks alpha(grad u).n = 0 on the
/// boundary of the mesh and gamma u(x, 0) = 0, to 1e-10, at `time_samples` times in [0, T].
SourceTerm manufactured_rhs(const PStructureModel& model, const ManufacturedSolution& sol,
                            const Mesh& mesh, double T, int time_samples = 9);

/// Nodal interpolant on levels 1..steps.
SpaceTimeField interpolate(const Mesh& mesh, const TimeGrid& grid,
                           const std::function<double(const Vec2&, double)>& fn);

}  // namespace stdd

#endif  // STDD_REFERENCE_HPP
