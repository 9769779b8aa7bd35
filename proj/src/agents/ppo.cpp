#include "safecrl/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace safecrl {

SurrogateEval clipped_surrogate(const Policy& policy, const Mat& states, const Mat& actions,
                                const Vec& behavior_log_probs, const Vec& advantages,
                                double clip_eps) {
  if (clip_eps < 0.0) throw ConfigError("clipped_surrogate: clip_eps must be non-negative");
  const Eigen::Index n = states.cols();
  const Vec new_log_probs = policy.log_prob_batch(states, actions);
  SurrogateEval out;
  Vec weights(n);
  int clipped = 0;
  double obj = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(new_log_probs[i] - behavior_log_probs[i]);
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    const double a = advantages[i];
    const double raw = ratio * a;
    const double cut = clipped_ratio * a;
    obj += std::min(raw, cut);
    if (ratio != clipped_ratio) ++clipped;
    // the min is flat in theta whenever the clipped branch is strictly lower
    weights[i] = (raw <= cut) ? ratio * a : 0.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = -obj * inv_n;
  out.clip_fraction = static_cast<double>(clipped) * inv_n;
  out.grad = -policy.weighted_score(states, actions, weights * inv_n);
  return out;
}

namespace {

struct CriticEval {
  double loss = 0.0;
  Vec grad;
};

CriticEval critic_mse(const ValueNet& critic, const Mat& states, const Vec& targets) {
  MlpCache cache;
  const Mat v = critic.net().forward(states, cache);
  const Eigen::Index n = states.cols();
  Mat diff = v;
  diff.row(0) -= targets.transpose();
  CriticEval out;
  out.loss = 0.5 * diff.row(0).squaredNorm() / static_cast<double>(n);
  out.grad = critic.net().backward(cache, diff / static_cast<double>(n));
  return out;
}

}  // namespace

PpoUpdateStats ppo_update(Policy& policy, ValueNet& critic, AdamOptimizer& actor_opt,
                          AdamOptimizer& critic_opt, const TrajectoryBatch& batch,
                          const AdvantageSet& adv, const PpoConfig& cfg,
                          const std::vector<TaskSnapshot>& snapshots, double lambda,
                          Rng& shuffle_rng) {
  const Eigen::Index n = batch.size();
  if (adv.reward_adv.size() != n || adv.reward_returns.size() != n)
    throw ConfigError("ppo_update: advantages were not computed from this batch");

  // iteration checkpoint for the non-finite rollback path
  const Vec actor_backup = policy.get_params();
  const Vec critic_backup = critic.net().flatten();
  const AdamOptimizer actor_opt_backup = actor_opt;
  const AdamOptimizer critic_opt_backup = critic_opt;

  PpoUpdateStats stats;
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  double actor_loss_acc = 0.0;
  double critic_loss_acc = 0.0;
  int minibatches = 0;

  try {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (Eigen::Index start = 0; start < n; start += cfg.minibatch) {
        const Eigen::Index count = std::min<Eigen::Index>(cfg.minibatch, n - start);
        Mat mb_states(batch.states.rows(), count);
        Mat mb_actions(batch.actions.rows(), count);
        Vec mb_logp(count), mb_adv(count), mb_ret(count);
        for (Eigen::Index k = 0; k < count; ++k) {
          const int idx = order[start + k];
          mb_states.col(k) = batch.states.col(idx);
          mb_actions.col(k) = batch.actions.col(idx);
          mb_logp[k] = batch.log_probs[idx];
          mb_adv[k] = adv.reward_adv[idx];
          mb_ret[k] = adv.reward_returns[idx];
        }

        SurrogateEval sur =
            clipped_surrogate(policy, mb_states, mb_actions, mb_logp, mb_adv, cfg.clip_eps);
        const EwcPenalty pen = ewc_penalty(policy.get_params(), snapshots, lambda);
        const double loss = sur.loss + pen.value;
        if (!std::isfinite(loss)) throw NumericError("ppo_update: non-finite actor loss");
        Vec params = policy.get_params();
        actor_opt.step(params, sur.grad + pen.grad);
        policy.set_params(params);
        actor_loss_acc += loss;

        CriticEval ce = critic_mse(critic, mb_states, mb_ret);
        if (!std::isfinite(ce.loss)) throw NumericError("ppo_update: non-finite critic loss");
        Vec cparams = critic.net().flatten();
        critic_opt.step(cparams, ce.grad);
        critic.net().unflatten(cparams);
        critic_loss_acc += ce.loss;
        ++minibatches;
      }
    }
  } catch (const NumericError&) {
    policy.set_params(actor_backup);
    critic.net().unflatten(critic_backup);
    actor_opt = actor_opt_backup;
    critic_opt = critic_opt_backup;
    stats.rolled_back = true;
    return stats;
  }

  stats.actor_loss = minibatches ? actor_loss_acc / minibatches : 0.0;
  stats.critic_loss = minibatches ? critic_loss_acc / minibatches : 0.0;
  stats.ewc = ewc_penalty(policy.get_params(), snapshots, lambda);

  const Vec post_logp = policy.log_prob_batch(batch.states, batch.actions);
  int clipped = 0;
  double kl_acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(post_logp[i] - batch.log_probs[i]);
    if (ratio < 1.0 - cfg.clip_eps || ratio > 1.0 + cfg.clip_eps) ++clipped;
    kl_acc += batch.log_probs[i] - post_logp[i];
  }
  stats.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  stats.approx_kl = kl_acc / static_cast<double>(n);
  return stats;
}

// ---------------------------------------------------------------------------

PpoLearner::PpoLearner(std::unique_ptr<Policy> policy, ValueNet reward_critic, PpoConfig cfg,
                       EwcConfig ewc, ShapingConfig shaping, uint64_t seed)
    : policy_(std::move(policy)),
      reward_critic_(std::move(reward_critic)),
      cost_critic_(reward_critic_.net().sizes().front(),
                   std::vector<int>(reward_critic_.net().sizes().begin() + 1,
                                    reward_critic_.net().sizes().end() - 1)),
      actor_opt_(policy_->param_count(), cfg.actor_lr),
      critic_opt_(reward_critic_.param_count(), cfg.critic_lr),
      cfg_(cfg),
      ewc_(ewc),
      shaping_(shaping),
      shuffle_rng_(make_stream(seed, 0xFF01)) {
  if (ewc_.lambda < 0.0) throw ConfigError("PpoLearner: lambda must be non-negative");
  if (ewc_.fisher_window < 1) throw ConfigError("PpoLearner: fisher window must be >= 1");
}

void fill_episode_stats(const TrajectoryBatch& batch, IterationDiagnostics& diag) {
  if (batch.completed.empty()) return;
  double r = 0.0, c = 0.0, cd = 0.0;
  for (const auto& ep : batch.completed) {
    r += ep.reward_sum;
    c += ep.cost_sum;
    cd += ep.cost_sum_discounted;
  }
  const double n = static_cast<double>(batch.completed.size());
  diag.mean_episode_reward = r / n;
  diag.mean_episode_cost = c / n;
  diag.mean_episode_cost_discounted = cd / n;
}

IterationDiagnostics PpoLearner::update(const TrajectoryBatch& batch) {
  const Vec shaped = shape_rewards(batch.rewards, batch.costs, shaping_);
  const AdvantageSet adv = compute_advantages(batch, cfg_.gamma, cfg_.gae_lambda, true,
                                              shaping_.enabled ? &shaped : nullptr);
  const PpoUpdateStats stats =
      ppo_update(*policy_, reward_critic_, actor_opt_, critic_opt_, batch, adv, cfg_,
                 store_.snapshots(), ewc_.lambda, shuffle_rng_);

  for (const auto& ep : batch.completed) {
    fisher_window_.push_back(ep);
    while (fisher_window_.size() > static_cast<size_t>(ewc_.fisher_window))
      fisher_window_.pop_front();
  }

  IterationDiagnostics diag;
  fill_episode_stats(batch, diag);
  diag.kl = stats.approx_kl;
  diag.clip_fraction = stats.clip_fraction;
  diag.ewc_penalty = stats.ewc.value;
  diag.cost_estimate = adv.mean_episode_cost;
  diag.degraded = stats.rolled_back;
  return diag;
}

void PpoLearner::on_task_start(const TaskId& /*task*/, const std::vector<uint8_t>& mask) {
  policy_->set_action_mask(mask);
  fisher_window_.clear();
}

void PpoLearner::on_task_boundary(const TaskId& finished_task, int segment) {
  if (ewc_.lambda == 0.0) return;  // plain PPO carries no consolidation state
  if (fisher_window_.empty()) return;  // nothing observed in this segment
  const Vec fisher = estimate_fisher(*policy_, fisher_window_);
  store_.snapshot_task(finished_task, policy_->get_params(), fisher, segment);
}

}  // namespace safecrl
