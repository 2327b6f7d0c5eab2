#include "stdd/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stdd/errors.hpp"

namespace stdd {

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("time horizon T must be positive");
  if (steps < 1) throw ConfigError("time grid needs at least one step");
}

SpaceTimeField::SpaceTimeField(TimeGrid grid, std::size_t num_nodes, double fill)
    : grid_(grid), num_nodes_(num_nodes),
      values_(static_cast<std::size_t>(grid.steps) * num_nodes, fill) {}

bool SpaceTimeField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void SpaceTimeField::require_compatible(const SpaceTimeField& other) const {
  if (!(grid_ == other.grid_) || num_nodes_ != other.num_nodes_) {
    throw ContractError("space-time fields live on different grids (" +
                        std::to_string(num_nodes_) + " vs " + std::to_string(other.num_nodes_) +
                        " nodes)");
  }
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& o) { return axpy(1.0, o); }
SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& o) { return axpy(-1.0, o); }

SpaceTimeField& SpaceTimeField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

SpaceTimeField& SpaceTimeField::axpy(double a, const SpaceTimeField& o) {
  require_compatible(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * o.values_[i];
  return *this;
}

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
SpaceTimeField operator*(double s, SpaceTimeField a) { return a *= s; }

double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
  a.require_compatible(b);
  double m = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
  return m;
}

}  // namespace stdd
