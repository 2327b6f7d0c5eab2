#ifndef STDD_MODEL_HPP
#define STDD_MODEL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "stdd/vec.hpp"

namespace stdd {

/// Source functional <f, v> = int int eta0 v + eta . grad v. Empty members mean zero.
struct SourceTerm {
  std::function<double(const Vec2& x, double t)> eta0;
  std::function<Vec2(const Vec2& x, double t)> eta;

  bool is_zero() const { return !eta0 && !eta; }
};

/// Constants of the p-structure conditions (growth, strong monotonicity, coercivity).
struct StructureConstants {
  double c_growth = 1.0;
  double d1 = 0.0;
  double c_mono = 1.0;
  double c_coer = 1.0;
  double d2 = 0.0;
};

/// Coefficients of  d/dt(gamma u) - div alpha(t, grad u) + beta(t, u) + f = 0
/// with homogeneous Neumann data and gamma u(0) = 0.
struct PStructureModel {
  std::string name;
  double p = 2.0;
  double lambda = 0.0;

  std::function<Vec2(const Vec2& x, double t, const Vec2& z)> alpha;
  /// Derivative of alpha in z, regularized with eps where alpha is not smooth.
  std::function<Mat2(const Vec2& x, double t, const Vec2& z, double eps)> alpha_jacobian;
  std::function<double(const Vec2& x, double t, double y)> beta;
  std::function<double(const Vec2& x, double t, double y, double eps)> beta_derivative;

  /// Optional secant coefficients with alpha(z) = c(z) z and beta(y) = c(y) y,
  /// used for fixed-point (Kacanov) steps when damped Newton stalls.
  std::function<double(const Vec2& x, double t, const Vec2& z, double eps)> alpha_secant;
  std::function<double(const Vec2& x, double t, double y, double eps)> beta_secant;

  /// Capacity, nonnegative and bounded. Zero marks elliptic regions.
  std::function<double(const Vec2& x)> gamma;
  SourceTerm source;

  /// Rate of the exponential change of variables; zero for an unshifted model.
  double shift_rate = 0.0;

  StructureConstants constants;

  void validate() const;
};

/// Capacity helpers.
std::function<double(const Vec2&)> constant_gamma(double value);
/// gamma = value outside [zero_lo, zero_hi] along the first axis, 0 inside.
std::function<double(const Vec2&)> indicator_gamma(double value, double zero_lo, double zero_hi);

/// alpha(z) = |z|^{p-2} z, beta(y) = |y|^{p-2} y + lambda y.
PStructureModel make_p_laplace(double p, double lambda, std::function<double(const Vec2&)> gamma);

/// alpha(z) = -z, beta(y) = y. Violates monotonicity and coercivity; used to
/// exercise the structure checks.
PStructureModel make_anti_monotone(std::function<double(const Vec2&)> gamma);

/// Checked evaluations: throw NumericError on non-finite input or output.
Vec2 eval_alpha(const PStructureModel& model, const Vec2& x, double t, const Vec2& z);
double eval_beta(const PStructureModel& model, const Vec2& x, double t, double y);

struct StructureSampler {
  int num_samples = 10000;
  double magnitude_min = 1e-3;
  double magnitude_max = 1e2;
  std::uint64_t seed = 1;
  int dim = 2;
};

/// Minimum relative slack of each condition over the samples. A condition holds
/// when its slack is >= -tolerance.
struct StructureReport {
  bool passed = false;
  double continuity = 0.0;
  double growth = 0.0;
  double monotonicity = 0.0;
  double coercivity = 0.0;
  double tolerance = 1e-12;
  int samples = 0;
};

StructureReport check_p_structure(const PStructureModel& model, const StructureSampler& sampler,
                                  std::optional<StructureConstants> constants = std::nullopt);

/// Relative slack of the strong-monotonicity inequality for one pair of arguments.
double monotonicity_margin(const PStructureModel& model, const Vec2& x, double t, const Vec2& z1,
                           const Vec2& z2, double y1, double y2, double c_mono);

}  // namespace stdd

#endif  // STDD_MODEL_HPP
