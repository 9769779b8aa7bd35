#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "safecrl/runner/curves.hpp"
#include "safecrl/runner/runner.hpp"
#include "safecrl/runner/sweep.hpp"

namespace {

safecrl::ExperimentConfig load_with_overrides(const std::string& config_path,
                                              const std::string& output_dir,
                                              const std::vector<uint64_t>& seeds,
                                              const std::string& algorithm) {
  safecrl::ExperimentConfig cfg = safecrl::ExperimentConfig::load(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (!seeds.empty()) cfg.seeds = seeds;
  if (!algorithm.empty()) {
    cfg.algorithm = algorithm;
    // re-derive the switches the algorithm implies
    cfg.ewc.lambda = (algorithm == "ppo") ? 0.0 : cfg.ewc.lambda;
    cfg.shaping.enabled = (algorithm == "safe_ewc");
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"safecrl - safe continual reinforcement learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string algorithm;
  std::vector<uint64_t> seeds;
  std::string run_dir;
  std::vector<double> grid;

  auto* run = app.add_subcommand("run", "train on the configured task schedule");
  run->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  run->add_option("-o,--output", output_dir, "override the output directory");
  run->add_option("--seed", seeds, "override the seed list");
  run->add_option("--algorithm", algorithm, "override the algorithm");

  auto* curves = app.add_subcommand("curves", "emit learning-curve CSVs and SVGs");
  curves->add_option("dir", run_dir, "run directory")->required();

  auto* metrics = app.add_subcommand("metrics", "recompute the metric suite from logs");
  metrics->add_option("dir", run_dir, "run directory")->required();

  auto* sweep = app.add_subcommand("sweep-lambda", "EWC weight selection sweep");
  sweep->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  sweep->add_option("--grid", grid, "lambda grid")
      ->default_val(std::vector<double>{0.5, 1, 5, 10, 25, 100});
  sweep->add_option("-o,--output", output_dir, "override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = load_with_overrides(config_path, output_dir, seeds, algorithm);
      return safecrl::run_experiment(cfg);
    }
    if (curves->parsed()) return safecrl::emit_curves(run_dir, std::cout);
    if (metrics->parsed()) return safecrl::emit_metrics(run_dir, std::cout);
    if (sweep->parsed()) {
      auto cfg = safecrl::ExperimentConfig::load(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      safecrl::lambda_sweep(cfg, grid, std::cout);
      return 0;
    }
  } catch (const safecrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
