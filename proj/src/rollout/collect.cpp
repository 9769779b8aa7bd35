#include "safecrl/rollout/collect.hpp"

#include <cmath>
#include <string>

namespace safecrl {

RolloutSet::RolloutSet(const EnvFactory& factory, int n_workers, uint64_t seed) {
  if (n_workers < 1) throw ConfigError("RolloutSet: need at least one worker");
  workers_.resize(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    workers_[w].env = factory();
    workers_[w].action_rng = make_stream(seed, 0x1000u + static_cast<uint64_t>(w));
    workers_[w].env_seed = splitmix64(seed ^ (0x2000u + static_cast<uint64_t>(w)));
  }
}

void RolloutSet::begin_episode(Worker& w) {
  w.obs = w.env->reset(w.env_seed);
  w.episode_open = true;
  w.ep_reward = 0.0;
  w.ep_cost = 0.0;
  w.ep_cost_disc = 0.0;
  w.ep_states.clear();
  w.ep_actions.clear();
}

CompletedEpisode RolloutSet::close_episode(Worker& w, int index) {
  CompletedEpisode ep;
  ep.worker = index;
  ep.length = static_cast<int>(w.ep_states.size());
  ep.reward_sum = w.ep_reward;
  ep.cost_sum = w.ep_cost;
  ep.cost_sum_discounted = w.ep_cost_disc;
  ep.states.resize(w.ep_states.front().size(), ep.length);
  ep.actions.resize(w.ep_actions.front().size(), ep.length);
  for (int t = 0; t < ep.length; ++t) {
    ep.states.col(t) = w.ep_states[t];
    ep.actions.col(t) = w.ep_actions[t];
  }
  w.episode_open = false;
  return ep;
}

void RolloutSet::apply_task(const TaskId& task) {
  for (auto& w : workers_) {
    w.env->apply_task(task);
    begin_episode(w);
  }
}

TrajectoryBatch RolloutSet::collect(const Policy& policy, const ValueNet& reward_critic,
                                    const ValueNet& cost_critic, int steps_per_worker) {
  if (steps_per_worker < 1) throw ConfigError("collect: steps_per_worker must be positive");
  const CmdpSpec espec = spec();
  const int64_t total = static_cast<int64_t>(steps_per_worker) * num_workers();

  TrajectoryBatch batch;
  batch.states.resize(espec.obs_dim, total);
  batch.actions.resize(policy.action_size(), total);
  batch.rewards.resize(total);
  batch.costs.resize(total);
  batch.log_probs.resize(total);
  batch.reward_values.resize(total);
  batch.cost_values.resize(total);
  if (espec.discrete()) {
    batch.action_mask = workers_.front().env->action_mask();
    if (policy.action_mask() != batch.action_mask)
      throw ConfigError("collect: policy mask does not match the active task");
  }

  int64_t i = 0;
  for (int widx = 0; widx < num_workers(); ++widx) {
    Worker& w = workers_[widx];
    if (!w.episode_open) begin_episode(w);
    int slice_start = static_cast<int>(i);
    for (int t = 0; t < steps_per_worker; ++t, ++i) {
      batch.states.col(i) = w.obs;
      const ActionSample sampled = policy.sample(w.obs, w.action_rng);
      batch.actions.col(i) = sampled.action;
      batch.log_probs[i] = sampled.log_prob;
      batch.reward_values[i] = reward_critic.value(w.obs);
      batch.cost_values[i] = cost_critic.value(w.obs);

      StepResult res;
      try {
        res = w.env->step(sampled.action);
      } catch (const NumericError& e) {
        throw NumericError("collect: worker " + std::to_string(widx) + " step " +
                           std::to_string(t) + ": " + e.what());
      }
      batch.rewards[i] = res.reward;
      batch.costs[i] = res.cost;
      w.ep_reward += res.reward;
      w.ep_cost += res.cost;
      w.ep_cost_disc += std::pow(espec.gamma, static_cast<double>(w.ep_states.size())) * res.cost;
      w.ep_states.push_back(w.obs);
      w.ep_actions.push_back(sampled.action);

      const bool last_step_of_batch = (t + 1 == steps_per_worker);
      if (res.terminated || res.truncated) {
        EpisodeSlice slice;
        slice.worker = widx;
        slice.start = slice_start;
        slice.end = static_cast<int>(i) + 1;
        slice.terminal = res.terminated;
        slice.episode_done = true;
        if (!res.terminated) {
          slice.bootstrap_reward = reward_critic.value(res.next_obs);
          slice.bootstrap_cost = cost_critic.value(res.next_obs);
        }
        batch.slices.push_back(slice);
        batch.completed.push_back(close_episode(w, widx));
        if (!last_step_of_batch) begin_episode(w);
        slice_start = static_cast<int>(i) + 1;
      } else {
        w.obs = res.next_obs;
        if (last_step_of_batch) {
          EpisodeSlice slice;
          slice.worker = widx;
          slice.start = slice_start;
          slice.end = static_cast<int>(i) + 1;
          slice.terminal = false;
          slice.episode_done = false;
          slice.bootstrap_reward = reward_critic.value(w.obs);
          slice.bootstrap_cost = cost_critic.value(w.obs);
          batch.slices.push_back(slice);
        }
      }
    }
  }
  return batch;
}

EvalStats evaluate_policy(const EnvFactory& factory, const Policy& policy,
                          const TaskId& task, int episodes, uint64_t seed) {
  if (episodes < 1) throw ConfigError("evaluate_policy: need at least one episode");
  auto env = factory();
  env->apply_task(task);
  std::unique_ptr<Policy> actor = policy.clone();
  actor->set_action_mask(env->action_mask());

  EvalStats stats;
  const uint64_t env_seed = splitmix64(seed ^ 0xEEABull);
  for (int e = 0; e < episodes; ++e) {
    Vec obs = env->reset(env_seed);
    for (;;) {
      const StepResult res = env->step(actor->act_greedy(obs));
      stats.mean_reward += res.reward;
      stats.mean_cost += res.cost;
      if (res.terminated || res.truncated) break;
      obs = res.next_obs;
    }
  }
  stats.mean_reward /= episodes;
  stats.mean_cost /= episodes;
  return stats;
}

}  // namespace safecrl
