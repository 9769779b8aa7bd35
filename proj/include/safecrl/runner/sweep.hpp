#pragma once

#include <ostream>
#include <vector>

#include "safecrl/runner/config.hpp"

namespace safecrl {

struct LambdaSweepRow {
  double lambda = 0.0;
  double reward_first = 0.0;  // end-of-sequence greedy evaluation, first task
  double cost_first = 0.0;
  double reward_second = 0.0;
  double cost_second = 0.0;
};

/// Trains PPO+EWC once per grid value over the config's two-segment
/// schedule, then evaluates the final policy on both tasks. Duplicated grid
/// entries are dropped with a warning. Writes sweep_lambda.csv under the
/// config's output directory and an aligned table to `out`.
std::vector<LambdaSweepRow> lambda_sweep(const ExperimentConfig& base,
                                         const std::vector<double>& grid,
                                         std::ostream& out);

}  // namespace safecrl
