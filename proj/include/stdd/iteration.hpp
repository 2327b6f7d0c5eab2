#ifndef STDD_ITERATION_HPP
#define STDD_ITERATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "stdd/errors.hpp"
#include "stdd/field.hpp"
#include "stdd/operators.hpp"
#include "stdd/resolvent.hpp"

namespace stdd {

enum class Scheme { pr, dr, as, as_shifted };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct SchemeConfig {
  Scheme scheme = Scheme::pr;
  /// Fixed method parameter, or s = s_rule_C * sqrt(max_sweeps) (additive schemes only).
  std::optional<double> s;
  std::optional<double> s_rule_C;
  int max_sweeps = 100;
  /// Stop when ||u^n - u^{n-1}||_H <= stop_tol. Zero runs all sweeps.
  double stop_tol = 1e-10;
  std::optional<SpaceTimeField> initial_guess;
  int threads = 1;
  bool record_wall_time = true;
  NewtonOptions newton;
  LinearOptions linear;

  double s_used() const;
  void validate(int q) const;
};

struct SweepRecord {
  int sweep = 0;
  double err_H = 0.0;
  double err_k_total = 0.0;
  std::vector<double> err_k;
  std::optional<double> pr_v_norm;  // ||v^n - v||_H
  std::optional<double> pr_w_norm;  // ||w^n - w||_H
  std::optional<double> wall_ms;
};

struct IterationTrace {
  bool has_reference = false;
  double initial_v_norm = 0.0;  // ||v^0 - v||_H (PR/DR with a reference)
  double initial_w_norm = 0.0;
  std::vector<SweepRecord> rows;
  int monotone_violations = 0;
  /// Constant c used in err_k.
  double c = 1.0;
};

/// A sweep failed; carries the rows recorded before the failure.
class SchemeFailure : public SolverError {
 public:
  SchemeFailure(const std::string& what, double worst_residual, int sweep, IterationTrace trace)
      : SolverError(what, worst_residual), sweep_(sweep), trace_(std::move(trace)) {}
  int sweep() const { return sweep_; }
  const IterationTrace& trace() const { return trace_; }

 private:
  int sweep_;
  IterationTrace trace_;
};

/// Iterates of the two-subdomain splittings; f2 caches F_2 u2 (H representation).
struct SplittingState {
  SpaceTimeField u1;
  SpaceTimeField u2;
  SpaceTimeField f2;
};

/// Start state from u2; f2 is the only direct application of F_2.
SplittingState make_splitting_state(const DiscreteOperatorContext& ctx, SpaceTimeField u2);

/// u1 = R1((sI - F2)u2), u2 = R2((sI - F1)u1), with (sI - F_l)x = 2 s x - rhs.
SplittingState pr_sweep(const DiscreteOperatorContext& ctx, const SplittingState& state,
                        const ResolventConfig& cfg);
/// u1 = R1((sI - F2)u2), u2 = R2(s u1 + F2 u2).
SplittingState dr_sweep(const DiscreteOperatorContext& ctx, const SplittingState& state,
                        const ResolventConfig& cfg);

/// v = s u2 + F2 u2 and w = s u2 - F2 u2 from a state.
SpaceTimeField splitting_v(const SplittingState& st, double s);
SpaceTimeField splitting_w(const SplittingState& st, double s);

/// u_l = R_l(s u) for every l, computed on up to `threads` workers.
/// `warm` (optional, one per subdomain) warm-starts Newton.
std::vector<SpaceTimeField> as_subdomain_solves(const DiscreteOperatorContext& ctx,
                                                const SpaceTimeField& u, const ResolventConfig& cfg,
                                                int threads,
                                                const std::vector<SpaceTimeField>* warm = nullptr);
/// (1/q) sum_l parts[l], summed in ascending l.
SpaceTimeField average_fields(const std::vector<SpaceTimeField>& parts);
SpaceTimeField as_sweep(const DiscreteOperatorContext& ctx, const SpaceTimeField& u,
                        const ResolventConfig& cfg, int threads);

/// Exponentially shifted model with rate rho = q: alpha(t, z) -> e^{-rho t} alpha(t, e^{rho t} z),
/// likewise beta and f. The capacity part picks up the reaction rho gamma u through the
/// context (see DiscreteOperatorContext::shift_coefficient). Requires gamma >= gamma0 > 0 at
/// every quadrature point of the mesh.
PStructureModel shift_model(const PStructureModel& model, const Mesh& mesh, int q);
/// Continuous reaction of a shifted model on a subdomain with unit weight: beta_hat(t, y) + rho gamma y.
double shifted_reaction(const PStructureModel& shifted, const Vec2& x, double t, double y);

/// u_k -> e^{-rho t_k} u_k and back.
SpaceTimeField shift_field(const SpaceTimeField& u, double rho);
SpaceTimeField unshift_field(const SpaceTimeField& u, double rho);

/// (1 + 2c/s)^{-N} ||u0 - u_h||^2_H + C(F)/(2 c s), C(F) = (1/q) sum_l ||F_l u_h||^2_H.
double as_envelope(const DiscreteOperatorContext& ctx, const SpaceTimeField& u0,
                   const SpaceTimeField& u_h, double s, int N, double c);

struct RunResult {
  SpaceTimeField u;                           // final iterate (unshifted)
  std::vector<SpaceTimeField> subdomain_iterates;
  IterationTrace trace;
  double s_used = 0.0;
  int sweeps = 0;
  bool converged = false;                     // stop_tol reached
};

/// Driver. Error columns are filled only when u_ref is given.
RunResult run_scheme(const DiscreteOperatorContext& ctx, const SchemeConfig& cfg,
                     const SpaceTimeField* u_ref = nullptr);

}  // namespace stdd

#endif  // STDD_ITERATION_HPP
