#ifndef STDD_DECOMPOSITION_HPP
#define STDD_DECOMPOSITION_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "stdd/field.hpp"
#include "stdd/mesh.hpp"

namespace stdd {

/// One overlapping strip Omega_l along the first axis. Indices are global mesh ids.
struct Subdomain {
  int id = 0;                       // 0-based
  std::vector<int> nodes;           // sorted
  std::vector<int> elements;        // sorted; all nodes in `nodes`
  std::vector<int> internal_boundary;  // nodes on the interface lines, not on the outer boundary
  double x_lo = 0.0;
  double x_hi = 0.0;
};

/// Partition-of-unity weights of one subdomain.
///   a: flux weight, continuous P1, nodal on Subdomain::nodes, zero on interface lines.
///   b: reaction/source weight, linear per element (may jump across interfaces), >= c_min.
///   g: capacity weight; equal to b.
struct WeightFamily {
  std::vector<double> a;
  std::vector<std::array<double, 3>> b;  // per Subdomain::elements entry, element-local nodes
  std::vector<std::array<double, 3>> g;
};

enum class WeightKind { a, b, g };
enum class Side { left, right };

/// Overlap of strips l and l+1, in grid indices along the first axis.
struct Overlap {
  int i_start = 0;
  int i_end = 0;
};

class Decomposition {
 public:
  int q() const { return static_cast<int>(subdomains_.size()); }
  double c_min() const { return c_min_; }
  std::size_t num_global_nodes() const { return num_global_nodes_; }
  const Subdomain& subdomain(int l) const { return subdomains_.at(l); }
  const WeightFamily& weights(int l) const { return weights_.at(l); }
  const std::vector<Overlap>& overlaps() const { return overlaps_; }
  /// Position of a global node inside subdomain l, or -1.
  int local_index(int l, std::size_t global_node) const { return local_of_global_.at(l)[global_node]; }

  /// Weight of subdomain l at position x along the first axis (zero extension outside Omega_l).
  /// At a jump of b/g, `side` selects the one-sided limit.
  double evaluate(const Mesh& mesh, int l, WeightKind kind, double x, Side side = Side::right) const;

  friend Decomposition build_decomposition(const Mesh& mesh, int q, double overlap_fraction,
                                           double c_min);

 private:
  double c_min_ = 0.1;
  std::size_t num_global_nodes_ = 0;
  std::vector<Subdomain> subdomains_;
  std::vector<WeightFamily> weights_;
  std::vector<Overlap> overlaps_;
  std::vector<std::vector<int>> local_of_global_;
};

/// q overlapping strips along axis 0. Overlap l sits around x = L (l+1)/q with width
/// overlap_fraction * L, snapped to mesh nodes; each overlap must span >= 2 elements.
Decomposition build_decomposition(const Mesh& mesh, int q, double overlap_fraction, double c_min);

/// Nodal restriction R_l to Omega_l, all time levels.
SpaceTimeField restrict_field(const Decomposition& dec, int l, const SpaceTimeField& u);
/// Zero extension E_l from Omega_l to Omega.
SpaceTimeField extend_field(const Decomposition& dec, int l, const SpaceTimeField& u_l);

}  // namespace stdd

#endif  // STDD_DECOMPOSITION_HPP
