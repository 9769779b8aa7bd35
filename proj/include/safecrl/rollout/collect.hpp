#pragma once

#include <memory>
#include <vector>

#include "safecrl/envs/task.hpp"
#include "safecrl/numcore/policy.hpp"
#include "safecrl/numcore/value.hpp"
#include "safecrl/rollout/trajectory.hpp"

namespace safecrl {

/// Fixed pool of environment workers stepped in lockstep task segments.
/// Each worker owns its environment instance and RNG stream, so batches are
/// a pure function of (seed, policy, schedule) regardless of scheduling.
class RolloutSet {
 public:
  RolloutSet(const EnvFactory& factory, int n_workers, uint64_t seed);

  int num_workers() const { return static_cast<int>(workers_.size()); }
  const Env& env(int worker) const { return *workers_[worker].env; }
  CmdpSpec spec() const { return workers_.front().env->spec(); }
  TaskId active_task() const { return workers_.front().env->active_task(); }

  /// Switches every worker to `task` and starts fresh episodes; any open
  /// partial episode is discarded.
  void apply_task(const TaskId& task);

  /// Collects exactly steps_per_worker steps from every worker. Value
  /// predictions for both critics are recorded per step; bootstrap values
  /// are recorded wherever an episode was cut.
  TrajectoryBatch collect(const Policy& policy, const ValueNet& reward_critic,
                          const ValueNet& cost_critic, int steps_per_worker);

 private:
  struct Worker {
    std::unique_ptr<Env> env;
    Rng action_rng;
    uint64_t env_seed = 0;
    Vec obs;
    bool episode_open = false;
    double ep_reward = 0.0;
    double ep_cost = 0.0;
    double ep_cost_disc = 0.0;
    std::vector<Vec> ep_states;
    std::vector<Vec> ep_actions;
  };

  void begin_episode(Worker& w);
  CompletedEpisode close_episode(Worker& w, int index);

  std::vector<Worker> workers_;
};

struct EvalStats {
  double mean_reward = 0.0;
  double mean_cost = 0.0;
};

/// Runs `episodes` noise-free episodes (greedy actions) on a fresh
/// environment configured for `task`.
EvalStats evaluate_policy(const EnvFactory& factory, const Policy& policy,
                          const TaskId& task, int episodes, uint64_t seed);

}  // namespace safecrl
