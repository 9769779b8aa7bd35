#pragma once

#include <vector>

#include "safecrl/envs/task.hpp"

namespace safecrl {

/// Everything recorded while one task segment was active: the step-cost
/// stream (summed) and the completed-episode reward series in order.
/// Immediate/final rewards are always re-derived from the stored series.
struct VisitLog {
  TaskId task;
  int visit = 0;  // 1-based per task
  double step_cost_sum = 0.0;
  int64_t step_count = 0;
  std::vector<double> episode_rewards;

  bool has_episodes() const { return !episode_rewards.empty(); }
  double immediate() const;     // first completed episode after the switch
  double final_reward() const;  // last completed episode of the visit
};

struct TotalCostResult {
  double value = 0.0;
  bool empty_series = false;  // no steps were recorded at all
};

/// Average total step cost per visit of one task: sum of every step cost
/// across all visits, divided by the number of visits.
TotalCostResult total_cost(const std::vector<VisitLog>& visits);

struct ForgetResult {
  double percent = 0.0;
  int pairs_used = 0;
  int pairs_excluded = 0;  // |final| below threshold, skipped
};

/// Mean percentage performance drop across consecutive visit pairs:
/// 100 * mean((final_prev - immediate_next) / |final_prev|). Negative values
/// indicate backward transfer. Pairs whose previous final reward is within
/// 1e-9 of zero are excluded rather than divided by.
ForgetResult forget_percentage(const std::vector<VisitLog>& visits);

struct FinalRewardResult {
  bool available = false;
  double value = 0.0;
};

/// Final episodic reward of the last visit of the task.
FinalRewardResult final_task_reward(const std::vector<VisitLog>& visits);

struct SeedAggregate {
  double mean = 0.0;
  double stddev = 0.0;
  bool stddev_defined = false;  // needs at least two seeds
};

/// Sample mean and sample (n-1) standard deviation across seeds.
SeedAggregate aggregate_seeds(const std::vector<double>& values);

}  // namespace safecrl
