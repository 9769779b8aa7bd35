#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "safecrl/envs/task.hpp"
#include "safecrl/numcore/policy.hpp"
#include "safecrl/rollout/trajectory.hpp"

namespace safecrl {

/// Frozen end-of-task actor parameters plus their diagonal Fisher estimate.
struct TaskSnapshot {
  TaskId task;
  Vec params;  // theta*
  Vec fisher;  // elementwise >= 0, same length as params
};

struct EwcConfig {
  double lambda = 10.0;  // penalty weight; 0 disables consolidation
  int fisher_window = 20;  // trailing completed episodes used for the estimate
};

struct ShapingConfig {
  double beta = 5.0;  // cost weight in r - beta*c
  bool enabled = false;
};

struct EwcPenalty {
  double value = 0.0;
  Vec grad;
  std::vector<double> per_task;  // one penalty term per snapshot
};

/// penalty = sum_snapshots (lambda/2) * sum_i F_i (theta_i - theta*_i)^2,
/// with the matching gradient lambda * F (.) (theta - theta*) accumulated
/// across snapshots.
EwcPenalty ewc_penalty(const Vec& params, const std::vector<TaskSnapshot>& snapshots,
                       double lambda);

/// Empirical diagonal Fisher of the actor over a window of completed
/// episodes: mean over every stored (s, a) pair of the squared score.
Vec estimate_fisher(const Policy& policy, const std::deque<CompletedEpisode>& window);

/// Keyed snapshot store with latest-visit-wins replacement. A second
/// snapshot within the same schedule segment is rejected.
class SnapshotStore {
 public:
  /// Returns false (and leaves the store untouched) on a duplicate call for
  /// the same segment.
  bool snapshot_task(const TaskId& task, Vec params, Vec fisher, int segment);

  const std::vector<TaskSnapshot>& snapshots() const { return snapshots_; }
  size_t size() const { return snapshots_.size(); }
  bool empty() const { return snapshots_.empty(); }
  void clear() { snapshots_.clear(); last_segment_.reset(); }

 private:
  std::vector<TaskSnapshot> snapshots_;
  std::optional<int> last_segment_;
};

/// r - beta*c when shaping is enabled, r otherwise. Raw streams are logged
/// unshaped regardless; this only feeds the optimized objective.
double shape_reward(double reward, double cost, const ShapingConfig& shaping);
Vec shape_rewards(const Vec& rewards, const Vec& costs, const ShapingConfig& shaping);

struct BetaSelection {
  bool defined = false;
  double beta = 0.0;
};

/// beta = max_reward / max_cost, the paper's rule of thumb for making cost
/// as important as reward. Undefined when max_cost is zero.
BetaSelection select_beta(double max_reward, double max_cost);

}  // namespace safecrl
