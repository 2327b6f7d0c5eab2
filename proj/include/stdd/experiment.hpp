#ifndef STDD_EXPERIMENT_HPP
#define STDD_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stdd/decomposition.hpp"
#include "stdd/iteration.hpp"
#include "stdd/mesh.hpp"
#include "stdd/model.hpp"
#include "stdd/operators.hpp"

namespace stdd {

struct ModelSpec {
  std::string name = "p_laplace";
  double p = 2.0;
  double lambda = 0.0;
  std::string gamma_kind = "constant";  // constant | indicator
  double gamma_value = 1.0;
  double gamma_zero_lo = 0.0;           // indicator: gamma = 0 on [lo, hi] along x
  double gamma_zero_hi = 0.0;
};

struct SourceSpec {
  std::string name = "zero";  // zero | manufactured_cos | custom
  double eta0 = 0.0;          // custom: constant densities
  Vec2 eta{0.0, 0.0};
};

struct DecompositionSpec {
  int q = 2;
  double overlap_fraction = 0.2;
  double c_min = 0.1;
};

struct OutputSpec {
  std::string csv_path;
  std::string json_summary_path;
  bool record_wall_time = true;
};

struct ExperimentConfig {
  MeshSpec mesh;
  TimeGrid time;
  ModelSpec model;
  SourceSpec source;
  DecompositionSpec decomposition;
  SchemeConfig scheme;
  std::string initial_guess = "zero";  // zero | random
  OutputSpec output;
  std::uint64_t rng_seed = 1;
  int verify_samples = 10000;
};

/// Strict JSON parsing: unknown keys and missing required keys raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

PStructureModel build_model(const ExperimentConfig& cfg, const Mesh& mesh);
DiscreteOperatorContext build_context(const ExperimentConfig& cfg);

/// Uniform values in [-1, 1] at every node and level.
SpaceTimeField random_field(const TimeGrid& grid, std::size_t num_nodes, std::mt19937_64& rng);

struct RunSummary {
  double final_err_H = 0.0;
  double final_err_k_total = 0.0;
  int sweeps = 0;
  double s_used = 0.0;
  int monotone_violations = 0;
  bool converged = false;
  double c = 1.0;
};

void write_trace_csv(std::ostream& os, const IterationTrace& trace, int q);
std::string summary_json(const RunSummary& summary, const ExperimentConfig& cfg);

/// Builds everything, solves the reference, runs the scheme and writes the artifacts.
/// A failing sweep still writes the partial CSV before the error propagates.
RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Property checks shared by `verify` and the test suites. Each returns the worst
// error (or margin) observed.
double partition_of_unity_error(const DiscreteOperatorContext& ctx);
double adjointness_error(const DiscreteOperatorContext& ctx, int pairs, std::mt19937_64& rng);
double capacity_reconstruction_error(const DiscreteOperatorContext& ctx);
double decomposition_identity_error(const DiscreteOperatorContext& ctx, int fields, std::mt19937_64& rng);
/// max over pairs of s ||R g1 - R g2||_H / ||g1 - g2||_H; nonexpansive means <= 1.
double resolvent_lipschitz(const DiscreteOperatorContext& ctx, const ResolventConfig& cfg, int pairs,
                           std::mt19937_64& rng);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

/// Runs the property suites and prints one line per check. Returns all results.
std::vector<CheckResult> verify_experiment(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace stdd

#endif  // STDD_EXPERIMENT_HPP
