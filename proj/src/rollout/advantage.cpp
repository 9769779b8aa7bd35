#include "safecrl/rollout/advantage.hpp"

#include <cmath>

namespace safecrl {

Vec discounted_returns(const Vec& rewards, double gamma, double bootstrap) {
  if (gamma < 0.0 || gamma >= 1.0)
    throw ConfigError("discounted_returns: gamma must lie in [0,1)");
  Vec out(rewards.size());
  double running = bootstrap;
  for (Eigen::Index t = rewards.size() - 1; t >= 0; --t) {
    running = rewards[t] + gamma * running;
    out[t] = running;
  }
  return out;
}

Vec gae(const Vec& rewards, const Vec& values, double bootstrap, double gamma,
        double lambda) {
  if (rewards.size() != values.size())
    throw ConfigError("gae: rewards/values length mismatch");
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("gae: gamma must lie in [0,1)");
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("gae: lambda must lie in [0,1]");
  const Eigen::Index n = rewards.size();
  Vec adv(n);
  double running = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double next_value = (t + 1 < n) ? values[t + 1] : bootstrap;
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * lambda * running;
    adv[t] = running;
  }
  return adv;
}

Vec normalize_advantages(const Vec& adv) {
  const double mean = adv.mean();
  Vec centred = adv.array() - mean;
  const double var = centred.squaredNorm() / static_cast<double>(adv.size());
  const double std = std::sqrt(var);
  if (std > 1e-12) centred /= std;
  return centred;
}

CostStats episode_cost_stats(const TrajectoryBatch& batch) {
  CostStats stats;
  for (const auto& ep : batch.completed) stats.per_episode.push_back(ep.cost_sum);
  if (stats.per_episode.empty()) {
    // no completed episode in this batch: report the open slices instead
    stats.from_truncated_only = true;
    for (const auto& slice : batch.slices) {
      double sum = 0.0;
      for (int t = slice.start; t < slice.end; ++t) sum += batch.costs[t];
      stats.per_episode.push_back(sum);
    }
  }
  if (stats.per_episode.empty())
    throw ConfigError("episode_cost_stats: empty batch");
  double total = 0.0;
  for (double c : stats.per_episode) total += c;
  stats.mean_episode_cost = total / static_cast<double>(stats.per_episode.size());
  return stats;
}

AdvantageSet compute_advantages(const TrajectoryBatch& batch, double gamma,
                                double lambda, bool normalize_reward,
                                const Vec* shaped_rewards) {
  const Vec& reward_stream = shaped_rewards ? *shaped_rewards : batch.rewards;
  if (reward_stream.size() != batch.size())
    throw ConfigError("compute_advantages: reward stream length mismatch");

  AdvantageSet out;
  out.reward_adv.resize(batch.size());
  out.cost_adv.resize(batch.size());
  out.reward_returns.resize(batch.size());
  out.cost_returns.resize(batch.size());

  for (const auto& slice : batch.slices) {
    const int len = slice.end - slice.start;
    const Vec r = reward_stream.segment(slice.start, len);
    const Vec c = batch.costs.segment(slice.start, len);
    const Vec vr = batch.reward_values.segment(slice.start, len);
    const Vec vc = batch.cost_values.segment(slice.start, len);
    const double br = slice.terminal ? 0.0 : slice.bootstrap_reward;
    const double bc = slice.terminal ? 0.0 : slice.bootstrap_cost;
    out.reward_adv.segment(slice.start, len) = gae(r, vr, br, gamma, lambda);
    out.cost_adv.segment(slice.start, len) = gae(c, vc, bc, gamma, lambda);
    out.reward_returns.segment(slice.start, len) = discounted_returns(r, gamma, br);
    out.cost_returns.segment(slice.start, len) = discounted_returns(c, gamma, bc);
  }
  if (normalize_reward) out.reward_adv = normalize_advantages(out.reward_adv);
  out.mean_episode_cost = episode_cost_stats(batch).mean_episode_cost;
  return out;
}

}  // namespace safecrl
