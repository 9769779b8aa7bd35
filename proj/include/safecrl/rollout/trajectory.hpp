#pragma once

#include <vector>

#include "safecrl/common.hpp"

namespace safecrl {

/// Contiguous run of steps from one worker inside a batch. A slice ends
/// either because the episode finished (terminal state or horizon) or
/// because the batch did.
struct EpisodeSlice {
  int worker = 0;
  int start = 0;  // [start, end) into the batch arrays
  int end = 0;
  bool terminal = false;        // ended in a terminal state: bootstrap is zero
  bool episode_done = false;    // episode finished inside this batch
  double bootstrap_reward = 0;  // reward-critic value at the cut state
  double bootstrap_cost = 0;    // cost-critic value at the cut state
};

/// Full episode bookkeeping emitted when an episode completes during
/// collection; states/actions back the Fisher window, the sums back metrics.
struct CompletedEpisode {
  int worker = 0;
  int length = 0;
  double reward_sum = 0.0;
  double cost_sum = 0.0;
  double cost_sum_discounted = 0.0;  // sum gamma^t c_t within the episode
  Mat states;   // obs_dim x length
  Mat actions;  // act_size x length
};

/// On-policy batch from vectorized rollouts; column n of each matrix and
/// entry n of each vector describe the same step.
struct TrajectoryBatch {
  Mat states;
  Mat actions;
  Vec rewards;        // raw task rewards (never shaped)
  Vec costs;          // raw constraint costs
  Vec log_probs;      // behavior-policy log-probs at collection time
  Vec reward_values;  // reward-critic predictions V_r(s)
  Vec cost_values;    // cost-critic predictions V_c(s)
  std::vector<EpisodeSlice> slices;
  std::vector<CompletedEpisode> completed;
  std::vector<uint8_t> action_mask;  // active discrete mask (empty otherwise)

  int64_t size() const { return rewards.size(); }
};

/// Reward and cost channel estimates derived from one batch. The reward
/// advantages are normalized; cost advantages never are, because their raw
/// scale enters the constraint arithmetic.
struct AdvantageSet {
  Vec reward_adv;
  Vec cost_adv;
  Vec reward_returns;
  Vec cost_returns;
  double mean_episode_cost = 0.0;  // undiscounted per-episode cost estimate
};

}  // namespace safecrl
