#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "safecrl/agents/cpo.hpp"
#include "safecrl/agents/ppo.hpp"
#include "safecrl/envs/gridcrawl.hpp"
#include "safecrl/envs/pointvel.hpp"

namespace safecrl {

/// Full description of one experiment; everything needed to reproduce a run
/// travels in this one structure and is echoed into the run manifest.
struct ExperimentConfig {
  std::string algorithm = "ppo";        // ppo | ppo_ewc | safe_ewc | cpo
  std::string environment = "gridcrawl";  // gridcrawl | pointvel
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  int workers = 10;
  int steps_per_worker = 200;  // per worker per iteration
  std::vector<TaskSchedule::Segment> schedule;  // empty selects the default
  std::string output_dir = "runs/out";
  int eval_episodes = 3;
  std::vector<int> hidden = {64, 64};
  double log_std_init = 0.0;
  bool parallel_seeds = true;

  PpoConfig ppo;
  EwcConfig ewc;
  ShapingConfig shaping;
  CpoConfig cpo;
  PointVelConfig pointvel;
  GridCrawlConfig gridcrawl;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Enforces the algorithm/flag coupling (safe_ewc <=> shaping, ppo <=>
  /// lambda 0) and the budget divisibility needed for boundaries to land on
  /// iteration edges. Throws ConfigError.
  void validate() const;

  EnvFactory make_env_factory() const;
  CmdpSpec env_spec() const;
  double cost_limit() const;
  TaskSchedule make_schedule() const;
  std::unique_ptr<Learner> make_learner(uint64_t seed) const;
  /// Effective consolidation/shaping settings for the chosen algorithm.
  EwcConfig effective_ewc() const;
  ShapingConfig effective_shaping() const;

  /// FNV-1a hash of the canonical JSON dump; recorded in the manifest.
  std::string hash() const;
};

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kLogSchemaVersion = 1;

}  // namespace safecrl
