#ifndef STDD_OPERATORS_HPP
#define STDD_OPERATORS_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stdd/decomposition.hpp"
#include "stdd/field.hpp"
#include "stdd/mesh.hpp"
#include "stdd/model.hpp"

namespace stdd {

/// Selects the global operator (unit weights) or the operator of one subdomain.
class RegionId {
 public:
  static RegionId global() { return RegionId(-1); }
  static RegionId subdomain(int l) { return RegionId(l); }

  bool is_global() const { return index_ < 0; }
  int index() const { return index_; }
  friend bool operator==(RegionId, RegionId) = default;

 private:
  explicit RegionId(int index) : index_(index) {}
  int index_;
};

/// Assembly data of one region, in region-local node numbering.
struct Region {
  std::vector<int> nodes;                      // global ids
  std::vector<int> elements;                   // global ids
  std::vector<std::array<int, 3>> local_elems; // element-local -> region-local node
  std::vector<std::array<double, 3>> a;        // flux weight, element-local nodes
  std::vector<std::array<double, 3>> b;        // reaction/source weight
  std::vector<double> lumped_mass;             // global lumped mass restricted to the region
  std::vector<double> capacity_mass;           // int g gamma phi_i over the region

  std::size_t size() const { return nodes.size(); }
};

/// Mesh, model, decomposition and time grid plus the precomputed diagonal masses.
/// Immutable; every apply_* call is reentrant.
class DiscreteOperatorContext {
 public:
  DiscreteOperatorContext(Mesh mesh, PStructureModel model, Decomposition dec, TimeGrid grid);

  const Mesh& mesh() const { return mesh_; }
  const PStructureModel& model() const { return model_; }
  const Decomposition& decomposition() const { return dec_; }
  const TimeGrid& time_grid() const { return grid_; }
  const Region& region(RegionId id) const;
  std::size_t num_nodes() const { return mesh_.num_nodes(); }

  /// Factor on the capacity difference quotient; 1 unless the model is shifted.
  double capacity_scale() const { return capacity_scale_; }
  /// Coefficient of the lumped capacity reaction added by a shifted model.
  double shift_coefficient() const { return shift_coefficient_; }

  SpaceTimeField zero_field() const { return SpaceTimeField(grid_, mesh_.num_nodes()); }

 private:
  Mesh mesh_;
  PStructureModel model_;
  Decomposition dec_;
  TimeGrid grid_;
  Region global_;
  std::vector<Region> subdomains_;
  double capacity_scale_ = 1.0;
  double shift_coefficient_ = 0.0;
};

/// r_i = int a alpha(t_k, grad u) . grad phi_i + b beta(t_k, u) phi_i (region-local, dual form).
std::vector<double> apply_A(const DiscreteOperatorContext& ctx, RegionId id, int k,
                            std::span<const double> u_k);

/// Dual load of the source at t_k: int b eta0 phi_i + a eta . grad phi_i.
std::vector<double> source_load(const DiscreteOperatorContext& ctx, RegionId id, int k);

/// Dual residual of F on a region-local field, level by level:
/// kappa C (u_k - u_{k-1}) / dt + sigma C u_k + A(t_k) u_k + f(t_k), with C u_0 = 0.
SpaceTimeField apply_F(const DiscreteOperatorContext& ctx, RegionId id, const SpaceTimeField& u);

/// Divides a region-local dual field by the lumped mass (identification with H).
SpaceTimeField to_h_representation(const DiscreteOperatorContext& ctx, RegionId id,
                                   SpaceTimeField dual);

/// E_l M^{-1} F_l(R_l u) for a global field u (or M^{-1} F u for the global region).
SpaceTimeField apply_F_h(const DiscreteOperatorContext& ctx, RegionId id, const SpaceTimeField& u);

/// (u, v)_H = sum_k dt sum_i m_i u_ki v_ki over the region's nodes.
double h_inner(const DiscreteOperatorContext& ctx, const SpaceTimeField& u, const SpaceTimeField& v,
               RegionId id = RegionId::global());
double h_norm(const DiscreteOperatorContext& ctx, const SpaceTimeField& u,
              RegionId id = RegionId::global());

/// sum_k dt <r_k, u_k>.
double duality_pairing(const DiscreteOperatorContext& ctx, const SpaceTimeField& dual,
                       const SpaceTimeField& u);

/// (sum_k dt [int a |grad u_k|^p + int b |u_k|^p])^{1/p} on a region-local field.
double v_norm_p(const DiscreteOperatorContext& ctx, RegionId id, const SpaceTimeField& u);

/// Sparse matrix entries (row, col, value) in region-local numbering.
struct MatrixEntries {
  std::size_t n = 0;
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> values;

  void add(int r, int c, double v) {
    rows.push_back(r);
    cols.push_back(c);
    values.push_back(v);
  }
  void clear() {
    rows.clear();
    cols.clear();
    values.clear();
  }
};

enum class Linearization { newton, secant };

/// Linearization of A(t_k) at u_k: Newton uses the eps-regularized derivatives,
/// secant uses alpha(z) = c(z) z, beta(y) = c(y) y with frozen coefficients.
void assemble_A_linearization(const DiscreteOperatorContext& ctx, RegionId id, int k,
                              std::span<const double> u_k, double eps, Linearization kind,
                              MatrixEntries& out);

}  // namespace stdd

#endif  // STDD_OPERATORS_HPP
