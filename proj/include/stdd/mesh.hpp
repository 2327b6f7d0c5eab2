#ifndef STDD_MESH_HPP
#define STDD_MESH_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stdd/errors.hpp"
#include "stdd/vec.hpp"

namespace stdd {

/// Uniform structured mesh request: Omega = (0,L1) or (0,L1)x(0,L2).
struct MeshSpec {
  int dim = 1;
  std::vector<double> extent;
  std::vector<int> cells;
};

/// Reference quadrature rule in barycentric coordinates.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;  // sum to the reference measure
  double reference_measure = 1.0;
  int degree = 0;
};

/// 2-point Gauss rule on the unit interval (degree 3).
const QuadratureRule& interval_rule();
/// Edge-midpoint rule on the unit triangle (degree 2).
const QuadratureRule& triangle_rule();

/// A quadrature point mapped onto a physical element.
struct QuadraturePoint {
  Vec2 x;
  double weight = 0.0;             // physical weight, sums to the element measure
  std::array<double, 3> phi{};     // P1 basis values of the element-local nodes
};

/// Spatial P1 mesh: intervals in 1D, two triangles per rectangular cell in 2D
/// (diagonal from lower-left to upper-right). Immutable after construction.
class Mesh {
 public:
  int dim() const { return dim_; }
  int nodes_per_element() const { return dim_ + 1; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  const Vec2& node(std::size_t i) const { return nodes_[i]; }
  std::span<const int> element(std::size_t e) const {
    return {elements_[e].data(), static_cast<std::size_t>(nodes_per_element())};
  }
  double measure(std::size_t e) const { return measures_[e]; }
  /// Constant gradients of the element-local P1 basis functions.
  std::span<const Vec2> gradients(std::size_t e) const {
    return {gradients_[e].data(), static_cast<std::size_t>(nodes_per_element())};
  }
  std::span<const QuadraturePoint> quadrature(std::size_t e) const {
    const std::size_t nq = quad_per_element_;
    return {quad_.data() + e * nq, nq};
  }

  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  bool on_boundary(std::size_t i) const { return on_boundary_[i] != 0; }

  double extent(int axis) const { return extent_[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  /// Grid index of a node along one axis.
  int axis_index(std::size_t node, int axis) const;
  double domain_measure() const;

  friend Mesh build_mesh(const MeshSpec& spec);

 private:
  Mesh() = default;

  int dim_ = 1;
  std::array<double, 2> extent_{1.0, 0.0};
  std::array<int, 2> cells_{1, 0};
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<double> measures_;
  std::vector<std::array<Vec2, 3>> gradients_;
  std::size_t quad_per_element_ = 0;
  std::vector<QuadraturePoint> quad_;
  std::vector<int> boundary_nodes_;
  std::vector<char> on_boundary_;
};

Mesh build_mesh(const MeshSpec& spec);

/// Quadrature approximation of the integral of `integrand` over element `e`.
/// The integrand is called as integrand(const QuadraturePoint&, std::span<const Vec2> grads).
template <class Integrand>
double element_integrate(const Mesh& mesh, std::size_t e, Integrand&& integrand) {
  const auto grads = mesh.gradients(e);
  double sum = 0.0;
  for (const QuadraturePoint& qp : mesh.quadrature(e)) {
    const double value = integrand(qp, grads);
    if (!std::isfinite(value)) {
      throw NumericError("non-finite integrand on element " + std::to_string(e));
    }
    sum += qp.weight * value;
  }
  return sum;
}

}  // namespace stdd

#endif  // STDD_MESH_HPP
