#include "stdd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "stdd/errors.hpp"

namespace stdd {

void PStructureModel::validate() const {
  if (!(p >= 2.0) || !std::isfinite(p)) throw ConfigError("model exponent p must lie in [2, inf)");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("model lambda must be >= 0");
  if (!alpha || !alpha_jacobian || !beta || !beta_derivative || !gamma) {
    throw ConfigError("model '" + name + "' is missing a coefficient function");
  }
  if (!(shift_rate >= 0.0)) throw ConfigError("model shift rate must be >= 0");
}

std::function<double(const Vec2&)> constant_gamma(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("gamma must be finite and >= 0");
  return [value](const Vec2&) { return value; };
}

std::function<double(const Vec2&)> indicator_gamma(double value, double zero_lo, double zero_hi) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("gamma must be finite and >= 0");
  if (!(zero_lo <= zero_hi)) throw ConfigError("gamma zero region must satisfy lo <= hi");
  return [=](const Vec2& x) { return (x.x >= zero_lo && x.x <= zero_hi) ? 0.0 : value; };
}

namespace {

// |r|^{e} with the convention 0^0 = 1 and 0^{e>0} = 0.
double safe_pow(double r, double e) {
  if (e == 0.0) return 1.0;
  return r == 0.0 ? 0.0 : std::pow(r, e);
}

}  // namespace

PStructureModel make_p_laplace(double p, double lambda, std::function<double(const Vec2&)> gamma) {
  PStructureModel m;
  m.name = "p_laplace";
  m.p = p;
  m.lambda = lambda;
  m.gamma = std::move(gamma);

  m.alpha = [p](const Vec2&, double, const Vec2& z) -> Vec2 {
    if (p == 2.0) return z;
    return safe_pow(norm(z), p - 2.0) * z;
  };
  m.alpha_jacobian = [p](const Vec2&, double, const Vec2& z, double eps) -> Mat2 {
    if (p == 2.0) return Mat2::identity();
    const double r2 = dot(z, z) + eps * eps;
    if (r2 == 0.0) return Mat2::identity(0.0);
    const double d = std::pow(r2, 0.5 * (p - 2.0));
    const double o = (p - 2.0) * std::pow(r2, 0.5 * (p - 4.0));
    return {d + o * z.x * z.x, o * z.x * z.y, o * z.y * z.x, d + o * z.y * z.y};
  };
  m.alpha_secant = [p](const Vec2&, double, const Vec2& z, double eps) {
    if (p == 2.0) return 1.0;
    return std::pow(dot(z, z) + eps * eps, 0.5 * (p - 2.0));
  };

  m.beta = [p, lambda](const Vec2&, double, double y) {
    if (p == 2.0) return y + lambda * y;
    return safe_pow(std::abs(y), p - 2.0) * y + lambda * y;
  };
  m.beta_derivative = [p, lambda](const Vec2&, double, double y, double eps) {
    if (p == 2.0) return 1.0 + lambda;
    const double r2 = y * y + eps * eps;
    if (r2 == 0.0) return lambda;
    return std::pow(r2, 0.5 * (p - 2.0)) + (p - 2.0) * std::pow(r2, 0.5 * (p - 4.0)) * y * y + lambda;
  };
  m.beta_secant = [p, lambda](const Vec2&, double, double y, double eps) {
    if (p == 2.0) return 1.0 + lambda;
    return std::pow(y * y + eps * eps, 0.5 * (p - 2.0)) + lambda;
  };

  // |beta(y)| <= (1 + lambda)|y|^{p-1} + lambda: lambda|y| <= lambda max(1, |y|^{p-1}).
  m.constants.c_growth = 1.0 + lambda;
  m.constants.d1 = p > 2.0 ? lambda : 0.0;
  m.constants.c_mono = std::pow(2.0, 2.0 - p);
  m.constants.c_coer = 1.0;
  m.constants.d2 = 0.0;
  m.validate();
  return m;
}

PStructureModel make_anti_monotone(std::function<double(const Vec2&)> gamma) {
  PStructureModel m;
  m.name = "anti_monotone";
  m.p = 2.0;
  m.lambda = 0.0;
  m.gamma = std::move(gamma);
  m.alpha = [](const Vec2&, double, const Vec2& z) { return -z; };
  m.alpha_jacobian = [](const Vec2&, double, const Vec2&, double) { return Mat2::identity(-1.0); };
  m.beta = [](const Vec2&, double, double y) { return y; };
  m.beta_derivative = [](const Vec2&, double, double, double) { return 1.0; };
  // Declares the constants of the p = 2 Laplacian it impersonates.
  m.constants = {1.0, 0.0, 1.0, 1.0, 0.0};
  m.validate();
  return m;
}

Vec2 eval_alpha(const PStructureModel& model, const Vec2& x, double t, const Vec2& z) {
  if (!is_finite(z) || !is_finite(x) || !std::isfinite(t)) {
    throw NumericError("eval_alpha: non-finite argument");
  }
  const Vec2 a = model.alpha(x, t, z);
  if (!is_finite(a)) throw NumericError("eval_alpha: non-finite flux");
  return a;
}

double eval_beta(const PStructureModel& model, const Vec2& x, double t, double y) {
  if (!std::isfinite(y) || !is_finite(x) || !std::isfinite(t)) {
    throw NumericError("eval_beta: non-finite argument");
  }
  const double b = model.beta(x, t, y);
  if (!std::isfinite(b)) throw NumericError("eval_beta: non-finite reaction");
  return b;
}

namespace {

double relative_slack(double lhs, double rhs) {
  const double scale = std::abs(lhs) + std::abs(rhs);
  const double slack = lhs - rhs;
  if (scale == 0.0) return 0.0;
  return slack / scale;
}

}  // namespace

double monotonicity_margin(const PStructureModel& model, const Vec2& x, double t, const Vec2& z1,
                           const Vec2& z2, double y1, double y2, double c_mono) {
  const Vec2 da = eval_alpha(model, x, t, z1) - eval_alpha(model, x, t, z2);
  const double db = eval_beta(model, x, t, y1) - eval_beta(model, x, t, y2);
  const Vec2 dz = z1 - z2;
  const double dy = y1 - y2;
  const double lhs = dot(da, dz) + db * dy;
  const double rhs = c_mono * (std::pow(norm(dz), model.p) + std::pow(std::abs(dy), model.p));
  return relative_slack(lhs, rhs);
}

StructureReport check_p_structure(const PStructureModel& model, const StructureSampler& sampler,
                                  std::optional<StructureConstants> constants) {
  if (sampler.num_samples < 1) throw ConfigError("check_p_structure needs at least one sample");
  if (!(sampler.magnitude_min > 0.0 && sampler.magnitude_min <= sampler.magnitude_max)) {
    throw ConfigError("check_p_structure needs 0 < magnitude_min <= magnitude_max");
  }
  const StructureConstants k = constants.value_or(model.constants);
  const double p = model.p;

  std::mt19937_64 rng(sampler.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(sampler.magnitude_min);
  const double log_hi = std::log(sampler.magnitude_max);
  auto magnitude = [&] { return std::exp(log_lo + (log_hi - log_lo) * unit(rng)); };
  auto scalar = [&] { return (unit(rng) < 0.5 ? -1.0 : 1.0) * magnitude(); };
  auto vector = [&]() -> Vec2 {
    const double r = magnitude();
    if (sampler.dim == 1) return {(unit(rng) < 0.5 ? -r : r), 0.0};
    const double th = 2.0 * std::numbers::pi * unit(rng);
    return {r * std::cos(th), r * std::sin(th)};
  };

  StructureReport rep;
  rep.samples = sampler.num_samples;
  const double inf = std::numeric_limits<double>::infinity();
  rep.continuity = rep.growth = rep.monotonicity = rep.coercivity = inf;

  for (int n = 0; n < sampler.num_samples; ++n) {
    const Vec2 x{unit(rng), unit(rng)};
    const double t = unit(rng);
    const Vec2 z1 = vector();
    const Vec2 z2 = vector();
    const double y1 = scalar();
    const double y2 = scalar();

    // 1. continuity in (y, z): a tiny perturbation moves the value by a tiny relative amount
    {
      const double hz = 1e-10 * (1.0 + norm(z1));
      const double hy = 1e-10 * (1.0 + std::abs(y1));
      const Vec2 a0 = eval_alpha(model, x, t, z1);
      const Vec2 a1 = eval_alpha(model, x, t, z1 + Vec2{hz, hz});
      const double b0 = eval_beta(model, x, t, y1);
      const double b1 = eval_beta(model, x, t, y1 + hy);
      const double change = std::max(norm(a1 - a0) / (1.0 + norm(a0)),
                                     std::abs(b1 - b0) / (1.0 + std::abs(b0)));
      constexpr double allowed = 1e-6;
      rep.continuity = std::min(rep.continuity, (allowed - change) / allowed);
    }
    // 2. growth
    {
      const double a = norm(eval_alpha(model, x, t, z1));
      const double b = std::abs(eval_beta(model, x, t, y1));
      rep.growth = std::min(rep.growth,
                            relative_slack(k.c_growth * std::pow(norm(z1), p - 1.0) + k.d1, a));
      rep.growth = std::min(rep.growth,
                            relative_slack(k.c_growth * std::pow(std::abs(y1), p - 1.0) + k.d1, b));
    }
    // 3. strong monotonicity
    rep.monotonicity =
        std::min(rep.monotonicity, monotonicity_margin(model, x, t, z1, z2, y1, y2, k.c_mono));
    // 4. coercivity
    {
      const double lhs = dot(eval_alpha(model, x, t, z1), z1) + eval_beta(model, x, t, y1) * y1;
      const double rhs = k.c_coer * (std::pow(norm(z1), p) + std::pow(std::abs(y1), p)) - k.d2;
      rep.coercivity = std::min(rep.coercivity, relative_slack(lhs, rhs));
    }
  }
  const double tol = -rep.tolerance;
  rep.passed = rep.continuity >= tol && rep.growth >= tol && rep.monotonicity >= tol &&
               rep.coercivity >= tol;
  return rep;
}

}  // namespace stdd
