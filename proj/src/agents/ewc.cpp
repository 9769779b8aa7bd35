#include "safecrl/agents/ewc.hpp"

#include <cmath>

namespace safecrl {

EwcPenalty ewc_penalty(const Vec& params, const std::vector<TaskSnapshot>& snapshots,
                       double lambda) {
  if (lambda < 0.0) throw ConfigError("ewc_penalty: lambda must be non-negative");
  EwcPenalty out;
  out.grad = Vec::Zero(params.size());
  for (const auto& snap : snapshots) {
    if (snap.params.size() != params.size() || snap.fisher.size() != params.size())
      throw ConfigError("ewc_penalty: snapshot length mismatch for task " +
                        to_string(snap.task));
    const Vec diff = params - snap.params;
    const double term = 0.5 * lambda * (snap.fisher.array() * diff.array().square()).sum();
    out.per_task.push_back(term);
    out.value += term;
    out.grad.array() += lambda * snap.fisher.array() * diff.array();
  }
  return out;
}

Vec estimate_fisher(const Policy& policy, const std::deque<CompletedEpisode>& window) {
  if (window.empty()) throw ConfigError("estimate_fisher: empty episode window");
  Vec acc = Vec::Zero(policy.param_count());
  int64_t samples = 0;
  for (const auto& ep : window) {
    acc += policy.score_square_sum(ep.states, ep.actions);
    samples += ep.length;
  }
  if (samples == 0) throw ConfigError("estimate_fisher: window holds no samples");
  return acc / static_cast<double>(samples);
}

bool SnapshotStore::snapshot_task(const TaskId& task, Vec params, Vec fisher, int segment) {
  if (last_segment_ && *last_segment_ == segment) return false;
  last_segment_ = segment;
  for (auto& snap : snapshots_) {
    if (snap.task == task) {  // latest visit wins
      snap.params = std::move(params);
      snap.fisher = std::move(fisher);
      return true;
    }
  }
  snapshots_.push_back(TaskSnapshot{task, std::move(params), std::move(fisher)});
  return true;
}

double shape_reward(double reward, double cost, const ShapingConfig& shaping) {
  if (shaping.beta < 0.0) throw ConfigError("shape_reward: beta must be non-negative");
  return shaping.enabled ? reward - shaping.beta * cost : reward;
}

Vec shape_rewards(const Vec& rewards, const Vec& costs, const ShapingConfig& shaping) {
  if (rewards.size() != costs.size()) throw ConfigError("shape_rewards: length mismatch");
  if (!shaping.enabled) return rewards;
  return rewards - shaping.beta * costs;
}

BetaSelection select_beta(double max_reward, double max_cost) {
  BetaSelection out;
  if (max_cost <= 0.0) return out;  // undefined, caller must choose manually
  out.defined = true;
  out.beta = max_reward / max_cost;
  return out;
}

}  // namespace safecrl
