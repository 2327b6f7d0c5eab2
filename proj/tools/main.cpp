#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stdd/errors.hpp"
#include "stdd/experiment.hpp"

namespace {

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const stdd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const stdd::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const stdd::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << " (worst residual " << e.worst_residual() << ")\n";
    return 3;
  } catch (const stdd::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time domain decomposition for degenerate elliptic-parabolic p-Laplace problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON experiment configuration")->required();
    sub->add_option("--seed", seed, "override rng_seed");
    sub->add_option("--threads", threads, "cap on concurrent subdomain solves")->check(CLI::PositiveNumber);
  };
  CLI::App* run = app.add_subcommand("run", "solve the reference, run the scheme, write CSV and summary");
  add_common(run);
  CLI::App* verify = app.add_subcommand("verify", "run the property checks");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  return guarded([&] {
    stdd::ExperimentConfig cfg = stdd::load_config(config_path);
    if (run->count("--seed") + verify->count("--seed") > 0) cfg.rng_seed = seed;
    if (run->count("--threads") + verify->count("--threads") > 0) cfg.scheme.threads = threads;
    if (*run) {
      stdd::run_experiment(cfg, std::cout);
      return 0;
    }
    const auto results = stdd::verify_experiment(cfg, std::cout);
    for (const auto& r : results) {
      if (!r.passed) return 1;
    }
    return 0;
  });
}
