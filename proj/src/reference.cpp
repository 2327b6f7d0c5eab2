#include "stdd/reference.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "stdd/errors.hpp"

namespace stdd {

SpaceTimeField solve_monolithic(const DiscreteOperatorContext& ctx, const NewtonOptions& newton,
                                const LinearOptions& linear, const SpaceTimeField* initial_guess,
                                MonolithicStats* stats) {
  newton.validate();
  linear.validate();
  const std::size_t n = ctx.num_nodes();
  SpaceTimeField u = ctx.zero_field();
  if (initial_guess != nullptr) u.require_compatible(*initial_guess);
  std::vector<double> prev(n, 0.0);
  const std::vector<double> zero(n, 0.0);
  MonolithicStats local;
  for (int k = 1; k <= u.steps(); ++k) {
    std::span<const double> guess = initial_guess != nullptr ? initial_guess->level(k)
                                                              : std::span<const double>(prev);
    LevelSolve ls = newton_time_step(ctx, RegionId::global(), 0.0, k, prev, zero, newton, linear, guess);
    local.newton_iterations += ls.iterations;
    local.picard_steps += ls.picard_steps;
    local.max_residual = std::max(local.max_residual, ls.residual);
    std::copy(ls.u.begin(), ls.u.end(), u.level(k).begin());
    prev = std::move(ls.u);
  }
  if (stats != nullptr) *stats = local;
  return u;
}

ManufacturedSolution cosine_solution(int dim) {
  using std::numbers::pi;
  ManufacturedSolution s;
  if (dim == 1) {
    s.u = [](const Vec2& x, double t) { return t * std::cos(pi * x.x); };
    s.u_t = [](const Vec2& x, double) { return std::cos(pi * x.x); };
    s.grad = [](const Vec2& x, double t) { return Vec2{-pi * t * std::sin(pi * x.x), 0.0}; };
  } else {
    s.u = [](const Vec2& x, double t) { return t * std::cos(pi * x.x) * std::cos(pi * x.y); };
    s.u_t = [](const Vec2& x, double) { return std::cos(pi * x.x) * std::cos(pi * x.y); };
    s.grad = [](const Vec2& x, double t) {
      return Vec2{-pi * t * std::sin(pi * x.x) * std::cos(pi * x.y),
                  -pi * t * std::cos(pi * x.x) * std::sin(pi * x.y)};
    };
  }
  return s;
}

ManufacturedSolution sine_time_solution(int dim) {
  ManufacturedSolution base = cosine_solution(dim);
  ManufacturedSolution s;
  // base(x, t) = t * phi(x), so phi(x) = base.u_t(x, .)
  s.u = [b = base](const Vec2& x, double t) { return std::sin(t) * b.u_t(x, t); };
  s.u_t = [b = base](const Vec2& x, double t) { return std::cos(t) * b.u_t(x, t); };
  s.grad = [b = base](const Vec2& x, double t) { return std::sin(t) * b.grad(x, 1.0); };
  return s;
}

namespace {

std::string where(const Vec2& x, double t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(x=%.6g, y=%.6g, t=%.6g)", x.x, x.y, t);
  return buf;
}

}  // namespace

SourceTerm manufactured_rhs(const PStructureModel& model, const ManufacturedSolution& sol,
                            const Mesh& mesh, double T, int time_samples) {
  model.validate();
  if (!sol.u || !sol.u_t || !sol.grad) throw ConfigError("manufactured solution is incomplete");
  if (time_samples < 2) time_samples = 2;

  // Boundary sample points with their outward normals.
  std::vector<std::pair<Vec2, Vec2>> boundary;
  const double Lx = mesh.extent(0);
  if (mesh.dim() == 1) {
    boundary.push_back({{0.0, 0.0}, {-1.0, 0.0}});
    boundary.push_back({{Lx, 0.0}, {1.0, 0.0}});
  } else {
    const double Ly = mesh.extent(1);
    for (int i = 0; i <= 2 * mesh.cells(0); ++i) {
      const double x = Lx * i / (2.0 * mesh.cells(0));
      boundary.push_back({{x, 0.0}, {0.0, -1.0}});
      boundary.push_back({{x, Ly}, {0.0, 1.0}});
    }
    for (int j = 0; j <= 2 * mesh.cells(1); ++j) {
      const double y = Ly * j / (2.0 * mesh.cells(1));
      boundary.push_back({{0.0, y}, {-1.0, 0.0}});
      boundary.push_back({{Lx, y}, {1.0, 0.0}});
    }
  }
  for (int m = 0; m < time_samples; ++m) {
    const double t = T * m / (time_samples - 1);
    for (const auto& [x, nrm] : boundary) {
      const double flux = dot(eval_alpha(model, x, t, sol.grad(x, t)), nrm);
      if (!(std::abs(flux) <= 1e-10)) {
        throw ConfigError("manufactured solution violates the Neumann condition at " + where(x, t));
      }
    }
  }
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const Vec2& x = mesh.node(i);
    if (!(std::abs(model.gamma(x) * sol.u(x, 0.0)) <= 1e-10)) {
      throw ConfigError("manufactured solution violates gamma u(0) = 0 at " + where(x, 0.0));
    }
  }

  SourceTerm src;
  src.eta0 = [model, sol](const Vec2& x, double t) {
    return -(model.gamma(x) * sol.u_t(x, t) + model.beta(x, t, sol.u(x, t)));
  };
  src.eta = [model, sol](const Vec2& x, double t) { return -model.alpha(x, t, sol.grad(x, t)); };
  return src;
}

SpaceTimeField interpolate(const Mesh& mesh, const TimeGrid& grid,
                           const std::function<double(const Vec2&, double)>& fn) {
  SpaceTimeField u(grid, mesh.num_nodes());
  for (int k = 1; k <= grid.steps; ++k) {
    const double t = grid.time(k);
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) u(k, i) = fn(mesh.node(i), t);
  }
  return u;
}

}  // namespace stdd
