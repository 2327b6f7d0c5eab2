#ifndef STDD_FIELD_HPP
#define STDD_FIELD_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace stdd {

/// Uniform time grid t_k = k T / steps, k = 0..steps.
struct TimeGrid {
  double T = 1.0;
  int steps = 1;

  double dt() const { return T / steps; }
  double time(int k) const { return T * k / steps; }
  void validate() const;
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Nodal values on levels k = 1..steps. The level-0 state is implicit:
/// the capacity-weighted initial value is zero.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(TimeGrid grid, std::size_t num_nodes, double fill = 0.0);

  const TimeGrid& grid() const { return grid_; }
  int steps() const { return grid_.steps; }
  std::size_t num_nodes() const { return num_nodes_; }

  /// Level k in 1..steps.
  std::span<double> level(int k) {
    return {values_.data() + static_cast<std::size_t>(k - 1) * num_nodes_, num_nodes_};
  }
  std::span<const double> level(int k) const {
    return {values_.data() + static_cast<std::size_t>(k - 1) * num_nodes_, num_nodes_};
  }
  double& operator()(int k, std::size_t i) {
    return values_[static_cast<std::size_t>(k - 1) * num_nodes_ + i];
  }
  double operator()(int k, std::size_t i) const {
    return values_[static_cast<std::size_t>(k - 1) * num_nodes_ + i];
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;
  /// Throws ContractError unless grids and node counts agree.
  void require_compatible(const SpaceTimeField& other) const;

  SpaceTimeField& operator+=(const SpaceTimeField& o);
  SpaceTimeField& operator-=(const SpaceTimeField& o);
  SpaceTimeField& operator*=(double a);
  /// this += a * o
  SpaceTimeField& axpy(double a, const SpaceTimeField& o);

 private:
  TimeGrid grid_;
  std::size_t num_nodes_ = 0;
  std::vector<double> values_;
};

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(double s, SpaceTimeField a);

/// Largest absolute nodal difference.
double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b);

}  // namespace stdd

#endif  // STDD_FIELD_HPP
