#pragma once

#include "safecrl/rollout/trajectory.hpp"

namespace safecrl {

/// Discounted returns over one episode slice, accumulated backward and
/// seeded with the bootstrap value at the cut.
Vec discounted_returns(const Vec& rewards, double gamma, double bootstrap = 0.0);

/// Generalized advantage estimation over one episode slice. `values` holds
/// V(s_t) for each step; `bootstrap` is V at the state after the last step
/// (zero when the slice ended in a terminal state).
Vec gae(const Vec& rewards, const Vec& values, double bootstrap, double gamma,
        double lambda);

/// Shifts and scales to zero mean, unit standard deviation. Constant input
/// comes back centred at zero.
Vec normalize_advantages(const Vec& adv);

struct CostStats {
  double mean_episode_cost = 0.0;
  std::vector<double> per_episode;
  bool from_truncated_only = false;  // no completed episode was available
};

/// Mean and per-episode undiscounted cost sums over the batch's completed
/// episodes; falls back to open slices (flagged) when none completed.
CostStats episode_cost_stats(const TrajectoryBatch& batch);

/// Both channels for one batch. `shaped_rewards`, when given, replaces the
/// raw rewards in the reward channel (Safe EWC shaping); costs always come
/// from the raw cost stream.
AdvantageSet compute_advantages(const TrajectoryBatch& batch, double gamma,
                                double lambda, bool normalize_reward,
                                const Vec* shaped_rewards = nullptr);

}  // namespace safecrl
