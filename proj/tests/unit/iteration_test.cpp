#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "stdd/errors.hpp"
#include "stdd/iteration.hpp"
#include "stdd/reference.hpp"
#include "support.hpp"

using namespace stdd;
using stdd::testing::make_context;
using stdd::testing::Problem;
using stdd::testing::random_values;

namespace {

// Small 1D p = 3 problem on which the splittings are cheap.
Problem small_problem() {
  Problem pb;
  pb.cells = 16;
  pb.steps = 8;
  pb.p = 3.0;
  pb.lambda = 1.0;
  pb.manufactured = true;
  pb.overlap = 0.25;
  return pb;
}

SchemeConfig scheme(Scheme kind, double s, int sweeps) {
  SchemeConfig cfg;
  cfg.scheme = kind;
  cfg.s = s;
  cfg.max_sweeps = sweeps;
  cfg.stop_tol = 0.0;
  cfg.record_wall_time = false;
  return cfg;
}

}  // namespace

TEST(SchemeNames, RoundTrip) {
  for (Scheme s : {Scheme::pr, Scheme::dr, Scheme::as, Scheme::as_shifted}) {
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  }
  EXPECT_THROW(parse_scheme("jacobi"), ConfigError);
}

TEST(SchemeConfig, Validation) {
  SchemeConfig cfg;
  EXPECT_THROW(cfg.validate(2), ConfigError);  // neither s nor a rule
  cfg.s = 1.0;
  EXPECT_NO_THROW(cfg.validate(2));
  EXPECT_THROW(cfg.validate(3), ConfigError);  // PR needs two subdomains
  cfg.s_rule_C = 1.0;
  EXPECT_THROW(cfg.validate(2), ConfigError);  // both given
  cfg.s.reset();
  cfg.max_sweeps = 64;
  EXPECT_DOUBLE_EQ(cfg.s_used(), 8.0);
  cfg.scheme = Scheme::as;
  EXPECT_NO_THROW(cfg.validate(3));
  cfg.threads = 0;
  EXPECT_THROW(cfg.validate(3), ConfigError);
}

TEST(AdditiveSplitting, AveragesInFixedOrder) {
  const TimeGrid g{1.0, 2};
  const std::vector<SpaceTimeField> parts{SpaceTimeField(g, 3, 0.0), SpaceTimeField(g, 3, 2.0)};
  const auto avg = average_fields(parts);
  for (double v : avg.values()) EXPECT_EQ(v, 1.0);
}

TEST(Splittings, ZeroDataStaysZero) {
  Problem pb = small_problem();
  pb.manufactured = false;
  const auto ctx = make_context(pb);
  for (Scheme kind : {Scheme::pr, Scheme::dr, Scheme::as, Scheme::as_shifted}) {
    const RunResult r = run_scheme(ctx, scheme(kind, 2.0, 5));
    for (double v : r.u.values()) EXPECT_EQ(v, 0.0) << to_string(kind);
  }
}

TEST(Splittings, EquilibriumIsPreserved) {
  const auto ctx = make_context(small_problem());
  const auto u_h = solve_monolithic(ctx);
  ResolventConfig rc;
  rc.s = 3.0;
  SplittingState pr = make_splitting_state(ctx, u_h);
  SplittingState dr = pr;
  for (int n = 0; n < 10; ++n) {
    pr = pr_sweep(ctx, pr, rc);
    dr = dr_sweep(ctx, dr, rc);
    EXPECT_LE(max_abs_diff(pr.u1, u_h), 1e-9);
    EXPECT_LE(max_abs_diff(pr.u2, u_h), 1e-9);
    EXPECT_LE(max_abs_diff(dr.u1, u_h), 1e-9);
    EXPECT_LE(max_abs_diff(dr.u2, u_h), 1e-9);
  }
}

TEST(Splittings, EquilibriumStartStopsAfterOneSweep) {
  const auto ctx = make_context(small_problem());
  const auto u_h = solve_monolithic(ctx);
  SchemeConfig cfg = scheme(Scheme::pr, 3.0, 50);
  cfg.stop_tol = 1e-9;
  cfg.initial_guess = u_h;
  const RunResult r = run_scheme(ctx, cfg, &u_h);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.sweeps, 1);
  ASSERT_EQ(r.trace.rows.size(), 1u);
  EXPECT_LE(r.trace.rows[0].err_H, 1e-9);
}

TEST(Splittings, StopToleranceFixesRowCount) {
  const auto ctx = make_context(small_problem());
  SchemeConfig cfg = scheme(Scheme::dr, 10.0, 500);
  cfg.stop_tol = 1e-6;
  const RunResult r = run_scheme(ctx, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.sweeps, 500);
  EXPECT_EQ(static_cast<int>(r.trace.rows.size()), r.sweeps);
  EXPECT_FALSE(r.trace.has_reference);
}

TEST(PeacemanRachford, MonotoneAndSandwiched) {
  const auto ctx = make_context(small_problem());
  const auto u_h = solve_monolithic(ctx);
  for (double s : {1.0, 10.0}) {
    const RunResult r = run_scheme(ctx, scheme(Scheme::pr, s, 60), &u_h);
    EXPECT_EQ(r.trace.monotone_violations, 0);
    const double slack = 1e-10 * (1 + std::pow(r.trace.initial_v_norm, 2));
    double v_prev = r.trace.initial_v_norm;
    double w_prev = r.trace.initial_w_norm;
    for (const SweepRecord& row : r.trace.rows) {
      ASSERT_TRUE(row.pr_v_norm && row.pr_w_norm);
      EXPECT_LE(row.pr_v_norm.value() * row.pr_v_norm.value(), v_prev * v_prev + slack);
      // ||v^{n+1} - v|| <= ||w^n - w|| <= ||v^n - v||
      EXPECT_LE(row.pr_v_norm.value() * row.pr_v_norm.value(), w_prev * w_prev + slack);
      EXPECT_LE(w_prev * w_prev, v_prev * v_prev + slack);
      v_prev = row.pr_v_norm.value();
      w_prev = row.pr_w_norm.value();
    }
  }
}

TEST(Splittings, ErrorFunctionalDecays) {
  const auto ctx = make_context(small_problem());
  const auto u_h = solve_monolithic(ctx);
  for (Scheme kind : {Scheme::pr, Scheme::dr}) {
    const RunResult r = run_scheme(ctx, scheme(kind, 10.0, 400), &u_h);
    ASSERT_FALSE(r.trace.rows.empty());
    EXPECT_LT(r.trace.rows.back().err_k_total, r.trace.rows.front().err_k_total);
    EXPECT_LT(r.trace.rows.back().err_k_total, 1e-8) << to_string(kind);
    EXPECT_EQ(r.trace.rows.back().err_k.size(), 2u);
  }
}

TEST(Splittings, AllSchemesReachReferenceAccuracy) {
  const auto ctx = make_context(small_problem());
  const auto u_h = solve_monolithic(ctx);
  struct Case {
    Scheme kind;
    double s;
    int budget;
  };
  // AS converges to a point O(1/s) away from u_h, so it needs a very large s
  // and a correspondingly long budget.
  for (const Case& c : {Case{Scheme::pr, 10.0, 2000}, Case{Scheme::dr, 10.0, 2000}, Case{Scheme::as, 1e5, 250000}}) {
    SchemeConfig cfg = scheme(c.kind, c.s, c.budget);
    cfg.stop_tol = 1e-13;
    const RunResult r = run_scheme(ctx, cfg, &u_h);
    EXPECT_LE(r.trace.rows.back().err_H, 1e-6) << to_string(c.kind) << " after " << r.sweeps << " sweeps";
  }
}

TEST(DouglasRachford, ErrorDecreasesBelowTarget) {
  const auto ctx = make_context(small_problem());
  const auto u_h = solve_monolithic(ctx);
  const RunResult r = run_scheme(ctx, scheme(Scheme::dr, 30.0, 600), &u_h);
  EXPECT_LT(r.trace.rows.back().err_H, r.trace.rows.front().err_H);
  EXPECT_LE(r.trace.rows.back().err_H, 1e-6);
  EXPECT_EQ(r.trace.monotone_violations, 0);
}

TEST(AdditiveSplitting, ThreadCountDoesNotChangeIterates) {
  Problem pb = small_problem();
  pb.q = 3;
  pb.cells = 24;
  pb.overlap = 0.15;
  const auto ctx = make_context(pb);
  SchemeConfig one = scheme(Scheme::as, 5.0, 8);
  SchemeConfig four = one;
  four.threads = 4;
  const RunResult a = run_scheme(ctx, one);
  const RunResult b = run_scheme(ctx, four);
  EXPECT_EQ(max_abs_diff(a.u, b.u), 0.0);
  for (std::size_t l = 0; l < a.subdomain_iterates.size(); ++l) {
    EXPECT_EQ(max_abs_diff(a.subdomain_iterates[l], b.subdomain_iterates[l]), 0.0);
  }
}

TEST(AdditiveSplitting, SweepMatchesManualAverage) {
  const auto ctx = make_context(small_problem());
  std::mt19937_64 rng(3);
  const SpaceTimeField u = random_values(ctx.time_grid(), ctx.num_nodes(), rng);
  ResolventConfig rc;
  rc.s = 4.0;
  const SpaceTimeField next = as_sweep(ctx, u, rc, 2);
  SpaceTimeField manual = ctx.zero_field();
  for (int l = 0; l < 2; ++l) manual += resolvent_solve(ctx, l, rc, 4.0 * u);
  EXPECT_LE(max_abs_diff(next, 0.5 * manual), 1e-15);
}

TEST(Shift, FieldFactors) {
  const TimeGrid g{1.0, 4};
  std::mt19937_64 rng(13);
  const SpaceTimeField u = random_values(g, 5, rng);
  const SpaceTimeField hat = shift_field(u, 2.0);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_DOUBLE_EQ(hat(k, 3), std::exp(-2.0 * g.time(k)) * u(k, 3));
  }
  EXPECT_LE(max_abs_diff(unshift_field(hat, 2.0), u), 1e-15);
}

TEST(Shift, ModelCoefficients) {
  const Mesh mesh = build_mesh({1, {1.0}, {8}});
  PStructureModel base = make_p_laplace(3.0, 0.5, constant_gamma(1.0));
  base.source = manufactured_rhs(base, cosine_solution(1), mesh, 1.0);
  const PStructureModel hat = shift_model(base, mesh, 2);
  EXPECT_EQ(hat.shift_rate, 2.0);
  const Vec2 x{0.3, 0.0};
  const Vec2 z{-1.2, 0.0};
  // no change at t = 0
  EXPECT_DOUBLE_EQ(hat.alpha(x, 0.0, z).x, base.alpha(x, 0.0, z).x);
  EXPECT_DOUBLE_EQ(hat.beta(x, 0.0, 0.7), base.beta(x, 0.0, 0.7));
  const double t = 0.6;
  const double e = std::exp(2.0 * t);
  EXPECT_NEAR(hat.alpha(x, t, z).x, base.alpha(x, t, e * z).x / e, 1e-14);
  EXPECT_NEAR(hat.beta(x, t, 0.7), base.beta(x, t, e * 0.7) / e, 1e-14);
  EXPECT_NEAR(hat.source.eta0(x, t), base.source.eta0(x, t) / e, 1e-14);
  EXPECT_THROW(shift_model(hat, mesh, 2), ConfigError);
}

TEST(Shift, QuadraticReactionTriples) {
  const Mesh mesh = build_mesh({1, {1.0}, {8}});
  const PStructureModel hat = shift_model(make_p_laplace(2.0, 0.0, constant_gamma(1.0)), mesh, 2);
  for (double y : {-1.0, 0.25, 4.0}) {
    EXPECT_NEAR(shifted_reaction(hat, {0.5, 0.0}, 0.3, y), 3.0 * y, 1e-14);
  }
}

TEST(Shift, VanishingCapacityIsRejected) {
  const Mesh mesh = build_mesh({1, {1.0}, {8}});
  EXPECT_THROW(shift_model(make_p_laplace(2.0, 0.0, indicator_gamma(1.0, 0.0, 0.5)), mesh, 2), ConfigError);
  EXPECT_THROW(shift_model(make_p_laplace(2.0, 0.0, constant_gamma(0.0)), mesh, 2), ConfigError);
}

TEST(ShiftedAdditiveSplitting, EnvelopeHolds) {
  Problem pb;
  pb.cells = 32;
  pb.steps = 16;
  pb.p = 2.0;
  pb.overlap = 0.2;
  pb.manufactured = true;
  const auto ctx = make_context(pb);
  const auto u_h = solve_monolithic(ctx);
  const PStructureModel hat = shift_model(ctx.model(), ctx.mesh(), pb.q);
  const DiscreteOperatorContext hctx(ctx.mesh(), hat, ctx.decomposition(), ctx.time_grid());
  const SpaceTimeField uh_hat = shift_field(u_h, pb.q);
  for (int N : {16, 64}) {
    SchemeConfig cfg = scheme(Scheme::as_shifted, 0.0, N);
    cfg.s.reset();
    cfg.s_rule_C = 1.0;
    const RunResult r = run_scheme(ctx, cfg, &u_h);
    const double measured = std::pow(h_norm(hctx, shift_field(r.u, pb.q) - uh_hat), 2);
    const double bound = as_envelope(hctx, hctx.zero_field(), uh_hat, r.s_used, N, 1.0);
    EXPECT_LE(measured, bound) << N;
  }
}

TEST(Splittings, ResolventFailureReportsSweep) {
  const auto ctx = make_context(small_problem());
  SchemeConfig cfg = scheme(Scheme::pr, 1.0, 5);
  cfg.newton.max_iters = 1;
  try {
    run_scheme(ctx, cfg);
    FAIL() << "expected a SchemeFailure";
  } catch (const SchemeFailure& e) {
    EXPECT_EQ(e.sweep(), 1);
    EXPECT_TRUE(e.trace().rows.empty());
    EXPECT_NE(std::string(e.what()).find("sweep 1"), std::string::npos);
  }
}
