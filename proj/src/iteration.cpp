#include "stdd/iteration.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace stdd {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::pr: return "PR";
    case Scheme::dr: return "DR";
    case Scheme::as: return "AS";
    case Scheme::as_shifted: return "AS_shifted";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "PR") return Scheme::pr;
  if (name == "DR") return Scheme::dr;
  if (name == "AS") return Scheme::as;
  if (name == "AS_shifted") return Scheme::as_shifted;
  throw ConfigError("unknown scheme '" + name + "' (expected PR, DR, AS or AS_shifted)");
}

double SchemeConfig::s_used() const {
  if (s) return *s;
  if (s_rule_C) return *s_rule_C * std::sqrt(static_cast<double>(max_sweeps));
  return 1.0;
}

void SchemeConfig::validate(int q) const {
  if (s.has_value() == s_rule_C.has_value()) {
    throw ConfigError("give exactly one of s and s_rule");
  }
  if (s && !(*s > 0.0 && std::isfinite(*s))) throw ConfigError("scheme parameter s must be > 0");
  if (s_rule_C && !(*s_rule_C > 0.0 && std::isfinite(*s_rule_C))) {
    throw ConfigError("s_rule constant C must be > 0");
  }
  const bool additive = scheme == Scheme::as || scheme == Scheme::as_shifted;
  if (s_rule_C && !additive) throw ConfigError("s_rule = C sqrt(N) applies to the additive schemes only");
  if (!additive && q != 2) throw ConfigError(to_string(scheme) + " needs exactly q = 2 subdomains");
  if (max_sweeps < 1) throw ConfigError("max_sweeps must be >= 1");
  if (!(stop_tol >= 0.0)) throw ConfigError("stop_tol must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (initial_guess && !initial_guess->all_finite()) throw NumericError("initial guess is not finite");
  newton.validate();
  linear.validate();
}

SplittingState make_splitting_state(const DiscreteOperatorContext& ctx, SpaceTimeField u2) {
  SplittingState st;
  st.f2 = apply_F_h(ctx, RegionId::subdomain(1), u2);
  st.u1 = u2;
  st.u2 = std::move(u2);
  return st;
}

SpaceTimeField splitting_v(const SplittingState& st, double s) { return s * st.u2 + st.f2; }
SpaceTimeField splitting_w(const SplittingState& st, double s) { return s * st.u2 - st.f2; }

SplittingState pr_sweep(const DiscreteOperatorContext& ctx, const SplittingState& state,
                        const ResolventConfig& cfg) {
  const double s = cfg.s;
  const SpaceTimeField w = splitting_w(state, s);
  SplittingState next;
  next.u1 = resolvent_solve(ctx, 0, cfg, w, &state.u1);
  SpaceTimeField v = 2.0 * s * next.u1 - w;  // (sI - F1) u1
  next.u2 = resolvent_solve(ctx, 1, cfg, v, &state.u2);
  v.axpy(-s, next.u2);
  next.f2 = std::move(v);
  return next;
}

SplittingState dr_sweep(const DiscreteOperatorContext& ctx, const SplittingState& state,
                        const ResolventConfig& cfg) {
  const double s = cfg.s;
  const SpaceTimeField w = splitting_w(state, s);
  SplittingState next;
  next.u1 = resolvent_solve(ctx, 0, cfg, w, &state.u1);
  SpaceTimeField rhs = s * next.u1 + state.f2;
  next.u2 = resolvent_solve(ctx, 1, cfg, rhs, &state.u2);
  rhs.axpy(-s, next.u2);
  next.f2 = std::move(rhs);
  return next;
}

std::vector<SpaceTimeField> as_subdomain_solves(const DiscreteOperatorContext& ctx,
                                                const SpaceTimeField& u, const ResolventConfig& cfg,
                                                int threads, const std::vector<SpaceTimeField>* warm) {
  const int q = ctx.decomposition().q();
  const SpaceTimeField g = cfg.s * u;
  std::vector<SpaceTimeField> parts(static_cast<std::size_t>(q));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(q));
  auto solve = [&](int l) {
    try {
      const SpaceTimeField* guess =
          warm != nullptr && warm->size() == parts.size() ? &(*warm)[static_cast<std::size_t>(l)] : nullptr;
      parts[static_cast<std::size_t>(l)] = resolvent_solve(ctx, l, cfg, g, guess);
    } catch (...) {
      errors[static_cast<std::size_t>(l)] = std::current_exception();
    }
  };
  const int workers = std::min(threads, q);
  if (workers <= 1) {
    for (int l = 0; l < q; ++l) solve(l);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int l = next++; l < q; l = next++) solve(l);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return parts;
}

SpaceTimeField average_fields(const std::vector<SpaceTimeField>& parts) {
  if (parts.empty()) throw ContractError("average_fields: nothing to average");
  SpaceTimeField sum = parts.front();
  for (std::size_t l = 1; l < parts.size(); ++l) sum += parts[l];
  sum *= 1.0 / static_cast<double>(parts.size());
  return sum;
}

SpaceTimeField as_sweep(const DiscreteOperatorContext& ctx, const SpaceTimeField& u,
                        const ResolventConfig& cfg, int threads) {
  return average_fields(as_subdomain_solves(ctx, u, cfg, threads));
}

PStructureModel shift_model(const PStructureModel& model, const Mesh& mesh, int q) {
  model.validate();
  if (q < 1) throw ConfigError("shift rate q must be >= 1");
  if (model.shift_rate != 0.0) throw ConfigError("model " + model.name + " is already shifted");
  double gamma0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) gamma0 = std::min(gamma0, model.gamma(mesh.node(i)));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    for (const QuadraturePoint& qp : mesh.quadrature(e)) gamma0 = std::min(gamma0, model.gamma(qp.x));
  }
  if (!(gamma0 > 0.0)) {
    throw ConfigError("the shifted scheme needs gamma >= gamma0 > 0; sampled minimum is " +
                      std::to_string(gamma0));
  }
  const double rho = static_cast<double>(q);
  PStructureModel m = model;
  m.name = model.name + "_shifted";
  m.shift_rate = rho;
  m.alpha = [a = model.alpha, rho](const Vec2& x, double t, const Vec2& z) {
    const double e = std::exp(rho * t);
    return (1.0 / e) * a(x, t, e * z);
  };
  m.alpha_jacobian = [a = model.alpha_jacobian, rho](const Vec2& x, double t, const Vec2& z, double eps) {
    return a(x, t, std::exp(rho * t) * z, eps);
  };
  m.beta = [b = model.beta, rho](const Vec2& x, double t, double y) {
    const double e = std::exp(rho * t);
    return b(x, t, e * y) / e;
  };
  m.beta_derivative = [b = model.beta_derivative, rho](const Vec2& x, double t, double y, double eps) {
    return b(x, t, std::exp(rho * t) * y, eps);
  };
  if (model.alpha_secant) {
    m.alpha_secant = [a = model.alpha_secant, rho](const Vec2& x, double t, const Vec2& z, double eps) {
      return a(x, t, std::exp(rho * t) * z, eps);
    };
  }
  if (model.beta_secant) {
    m.beta_secant = [b = model.beta_secant, rho](const Vec2& x, double t, double y, double eps) {
      return b(x, t, std::exp(rho * t) * y, eps);
    };
  }
  if (model.source.eta0) {
    m.source.eta0 = [f = model.source.eta0, rho](const Vec2& x, double t) {
      return std::exp(-rho * t) * f(x, t);
    };
  }
  if (model.source.eta) {
    m.source.eta = [f = model.source.eta, rho](const Vec2& x, double t) {
      return std::exp(-rho * t) * f(x, t);
    };
  }
  return m;
}

double shifted_reaction(const PStructureModel& shifted, const Vec2& x, double t, double y) {
  return shifted.beta(x, t, y) + shifted.shift_rate * shifted.gamma(x) * y;
}

namespace {

SpaceTimeField scale_levels(SpaceTimeField u, double rho) {
  for (int k = 1; k <= u.steps(); ++k) {
    const double f = std::exp(rho * u.grid().time(k));
    for (double& v : u.level(k)) v *= f;
  }
  return u;
}

}  // namespace

SpaceTimeField shift_field(const SpaceTimeField& u, double rho) { return scale_levels(u, -rho); }
SpaceTimeField unshift_field(const SpaceTimeField& u, double rho) { return scale_levels(u, rho); }

double as_envelope(const DiscreteOperatorContext& ctx, const SpaceTimeField& u0,
                   const SpaceTimeField& u_h, double s, int N, double c) {
  const int q = ctx.decomposition().q();
  double cf = 0.0;
  for (int l = 0; l < q; ++l) {
    const double n = h_norm(ctx, apply_F_h(ctx, RegionId::subdomain(l), u_h));
    cf += n * n;
  }
  cf /= q;
  const double e0 = h_norm(ctx, u0 - u_h);
  return std::pow(1.0 + 2.0 * c / s, -static_cast<double>(N)) * e0 * e0 + cf / (2.0 * c * s);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Monitor {
  const DiscreteOperatorContext& ctx;  // unshifted
  const SpaceTimeField* ref;
  double c;
  int q;

  void errors(SweepRecord& row, const SpaceTimeField& u, const std::vector<const SpaceTimeField*>& parts) const {
    if (ref == nullptr) return;
    row.err_H = h_norm(ctx, u - *ref);
    row.err_k.assign(static_cast<std::size_t>(q), 0.0);
    row.err_k_total = 0.0;
    const double p = ctx.model().p;
    const Decomposition& dec = ctx.decomposition();
    for (int l = 0; l < q; ++l) {
      const SpaceTimeField d = restrict_field(dec, l, *parts[static_cast<std::size_t>(l)] - *ref);
      const double v = c * std::pow(v_norm_p(ctx, RegionId::subdomain(l), d), p);
      row.err_k[static_cast<std::size_t>(l)] = v;
      row.err_k_total += v;
    }
  }
};

}  // namespace

RunResult run_scheme(const DiscreteOperatorContext& ctx, const SchemeConfig& cfg, const SpaceTimeField* u_ref) {
  const int q = ctx.decomposition().q();
  cfg.validate(q);
  if (u_ref != nullptr && (u_ref->num_nodes() != ctx.num_nodes() || !(u_ref->grid() == ctx.time_grid()))) {
    throw ContractError("reference field does not match the context");
  }
  RunResult res;
  res.s_used = cfg.s_used();
  ResolventConfig rc{res.s_used, cfg.newton, cfg.linear};
  rc.validate();

  IterationTrace& trace = res.trace;
  trace.has_reference = u_ref != nullptr;
  trace.c = ctx.model().constants.c_mono;
  const Monitor mon{ctx, u_ref, trace.c, q};

  SpaceTimeField u0 = cfg.initial_guess ? *cfg.initial_guess : ctx.zero_field();
  u0.require_compatible(ctx.zero_field());

  auto fail = [&](const SolverError& e, int sweep) -> SchemeFailure {
    return SchemeFailure("sweep " + std::to_string(sweep) + ": " + e.what(), e.worst_residual(), sweep, trace);
  };

  if (cfg.scheme == Scheme::pr || cfg.scheme == Scheme::dr) {
    const double s = res.s_used;
    SplittingState st = make_splitting_state(ctx, u0);
    std::optional<SpaceTimeField> v_ref;
    std::optional<SpaceTimeField> w_ref;
    double vprev = 0.0;
    double wprev = 0.0;
    double slack = 0.0;
    if (u_ref != nullptr) {
      const SpaceTimeField f2ref = apply_F_h(ctx, RegionId::subdomain(1), *u_ref);
      v_ref = s * *u_ref + f2ref;
      w_ref = s * *u_ref - f2ref;
      trace.initial_v_norm = h_norm(ctx, splitting_v(st, s) - *v_ref);
      trace.initial_w_norm = h_norm(ctx, splitting_w(st, s) - *w_ref);
      vprev = trace.initial_v_norm;
      wprev = trace.initial_w_norm;
      slack = 1e-10 * (1.0 + vprev * vprev);
    }
    for (int n = 1; n <= cfg.max_sweeps; ++n) {
      const auto t0 = Clock::now();
      SplittingState next;
      try {
        next = cfg.scheme == Scheme::pr ? pr_sweep(ctx, st, rc) : dr_sweep(ctx, st, rc);
      } catch (const SolverError& e) {
        throw fail(e, n);
      }
      const auto t1 = Clock::now();
      const double step = h_norm(ctx, next.u2 - st.u2);
      st = std::move(next);

      SweepRecord row;
      row.sweep = n;
      if (cfg.record_wall_time) row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      mon.errors(row, st.u2, {&st.u1, &st.u2});
      if (u_ref != nullptr) {
        const double vn = h_norm(ctx, splitting_v(st, s) - *v_ref);
        const double wn = h_norm(ctx, splitting_w(st, s) - *w_ref);
        row.pr_v_norm = vn;
        row.pr_w_norm = wn;
        bool bad = vn * vn > vprev * vprev + slack;
        if (cfg.scheme == Scheme::pr) {
          bad = bad || vn * vn > wprev * wprev + slack || wprev * wprev > vprev * vprev + slack;
        }
        if (bad) ++trace.monotone_violations;
        vprev = vn;
        wprev = wn;
      }
      trace.rows.push_back(std::move(row));
      res.sweeps = n;
      if (step <= cfg.stop_tol) {
        res.converged = true;
        break;
      }
    }
    res.u = st.u2;
    res.subdomain_iterates = {std::move(st.u1), std::move(st.u2)};
    return res;
  }

  // additive schemes
  const bool shifted = cfg.scheme == Scheme::as_shifted;
  std::optional<DiscreteOperatorContext> hat;
  double rho = 0.0;
  if (shifted) {
    rho = static_cast<double>(q);
    hat.emplace(ctx.mesh(), shift_model(ctx.model(), ctx.mesh(), q), ctx.decomposition(), ctx.time_grid());
  }
  const DiscreteOperatorContext& wctx = shifted ? *hat : ctx;
  SpaceTimeField u = shifted ? shift_field(u0, rho) : u0;
  std::vector<SpaceTimeField> parts;
  for (int n = 1; n <= cfg.max_sweeps; ++n) {
    const auto t0 = Clock::now();
    try {
      parts = as_subdomain_solves(wctx, u, rc, cfg.threads, parts.empty() ? nullptr : &parts);
    } catch (const SolverError& e) {
      throw fail(e, n);
    }
    SpaceTimeField next = average_fields(parts);
    const auto t1 = Clock::now();
    const double step = shifted ? h_norm(ctx, unshift_field(next - u, rho)) : h_norm(ctx, next - u);
    u = std::move(next);

    SweepRecord row;
    row.sweep = n;
    if (cfg.record_wall_time) row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (u_ref != nullptr) {
      if (shifted) {
        std::vector<SpaceTimeField> up;
        std::vector<const SpaceTimeField*> ptrs;
        for (const auto& p : parts) up.push_back(unshift_field(p, rho));
        for (const auto& p : up) ptrs.push_back(&p);
        mon.errors(row, unshift_field(u, rho), ptrs);
      } else {
        std::vector<const SpaceTimeField*> ptrs;
        for (const auto& p : parts) ptrs.push_back(&p);
        mon.errors(row, u, ptrs);
      }
    }
    trace.rows.push_back(std::move(row));
    res.sweeps = n;
    if (step <= cfg.stop_tol) {
      res.converged = true;
      break;
    }
  }
  res.u = shifted ? unshift_field(u, rho) : u;
  for (auto& p : parts) res.subdomain_iterates.push_back(shifted ? unshift_field(p, rho) : std::move(p));
  return res;
}

}  // namespace stdd
