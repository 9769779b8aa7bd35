#pragma once

#include <limits>
#include <string>

#include "safecrl/agents/ewc.hpp"
#include "safecrl/numcore/value.hpp"
#include "safecrl/rollout/trajectory.hpp"

namespace safecrl {

/// Per-iteration training record shared by every agent.
struct IterationDiagnostics {
  double mean_episode_reward = std::numeric_limits<double>::quiet_NaN();
  double mean_episode_cost = std::numeric_limits<double>::quiet_NaN();
  double mean_episode_cost_discounted = std::numeric_limits<double>::quiet_NaN();
  double kl = 0.0;              // sampled KL(new || old) after the update
  double clip_fraction = 0.0;   // PPO family
  double ewc_penalty = 0.0;     // total across snapshots
  double cost_estimate = 0.0;   // J_C used by the constraint arithmetic
  std::string cpo_case;         // "feasible" / "infeasible-recovery" / "" for PPO
  bool degraded = false;        // rolled back (PPO) or rejected update (CPO)
};

/// One learning agent: owns the policy, critics, and optimizer state. The
/// runner is the single writer; rollout workers only read parameter copies.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual IterationDiagnostics update(const TrajectoryBatch& batch) = 0;
  virtual Policy& policy() = 0;
  virtual const Policy& policy() const = 0;
  virtual const ValueNet& reward_critic() const = 0;
  virtual const ValueNet& cost_critic() const = 0;

  /// Called when a segment begins (after the environment task switch).
  virtual void on_task_start(const TaskId& task, const std::vector<uint8_t>& mask) = 0;
  /// Called on a boundary for the segment that just ended; EWC variants
  /// snapshot the finished task here.
  virtual void on_task_boundary(const TaskId& finished_task, int segment) = 0;

  virtual const SnapshotStore* snapshot_store() const { return nullptr; }
};

/// Fills the episode statistics shared by all agents from raw streams.
void fill_episode_stats(const TrajectoryBatch& batch, IterationDiagnostics& diag);

}  // namespace safecrl
