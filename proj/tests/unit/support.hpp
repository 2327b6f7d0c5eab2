#ifndef STDD_TESTS_SUPPORT_HPP
#define STDD_TESTS_SUPPORT_HPP

#include <functional>
#include <random>
#include <string>

#include "stdd/decomposition.hpp"
#include "stdd/mesh.hpp"
#include "stdd/model.hpp"
#include "stdd/operators.hpp"
#include "stdd/reference.hpp"

namespace stdd::testing {

struct Problem {
  int dim = 1;
  int cells = 16;
  int cells_y = 4;
  double T = 1.0;
  int steps = 8;
  double p = 2.0;
  double lambda = 0.0;
  std::function<double(const Vec2&)> gamma = constant_gamma(1.0);
  bool manufactured = false;
  int q = 2;
  double overlap = 0.25;
  double c_min = 0.1;
};

inline Mesh make_mesh(const Problem& s) {
  if (s.dim == 1) return build_mesh({1, {1.0}, {s.cells}});
  return build_mesh({2, {1.0, 1.0}, {s.cells, s.cells_y}});
}

inline DiscreteOperatorContext make_context(const Problem& s) {
  Mesh mesh = make_mesh(s);
  PStructureModel model = make_p_laplace(s.p, s.lambda, s.gamma);
  if (s.manufactured) model.source = manufactured_rhs(model, cosine_solution(s.dim), mesh, s.T);
  Decomposition dec = build_decomposition(mesh, s.q, s.overlap, s.c_min);
  return DiscreteOperatorContext(std::move(mesh), std::move(model), std::move(dec), TimeGrid{s.T, s.steps});
}

inline SpaceTimeField random_values(const TimeGrid& grid, std::size_t n, std::mt19937_64& rng,
                                    double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  SpaceTimeField u(grid, n);
  for (double& v : u.values()) v = d(rng);
  return u;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace stdd::testing

#endif  // STDD_TESTS_SUPPORT_HPP
