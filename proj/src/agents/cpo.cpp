#include "safecrl/agents/cpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace safecrl {

const char* to_string(CpoCase c) {
  switch (c) {
    case CpoCase::kFeasible: return "feasible";
    case CpoCase::kInfeasibleRecovery: return "infeasible-recovery";
    case CpoCase::kDegenerate: return "degenerate";
  }
  return "unknown";
}

Vec conjugate_gradient(const std::function<Vec(const Vec&)>& hv, const Vec& rhs, int iters,
                       double tol, CgStats* stats) {
  Vec x = Vec::Zero(rhs.size());
  Vec residual = rhs;
  Vec direction = rhs;
  double rho = residual.squaredNorm();
  const double rhs_norm = std::sqrt(rho);
  const double target = tol * rhs_norm;

  int it = 0;
  while (it < iters && std::sqrt(rho) > target) {
    const Vec hd = hv(direction);
    if (!hd.allFinite()) throw NumericError("conjugate_gradient: non-finite operator output");
    const double dhd = direction.dot(hd);
    if (dhd <= 0.0)
      throw NumericError("conjugate_gradient: operator is not positive definite");
    const double alpha = rho / dhd;
    x += alpha * direction;
    residual -= alpha * hd;
    const double rho_next = residual.squaredNorm();
    if (!std::isfinite(rho_next)) throw NumericError("conjugate_gradient: NaN in iterates");
    direction = residual + (rho_next / rho) * direction;
    rho = rho_next;
    ++it;
  }
  if (stats != nullptr) {
    stats->iterations = it;
    stats->residual_norm = std::sqrt(rho);
    stats->rhs_norm = rhs_norm;
    stats->hit_cap = (it == iters) && (std::sqrt(rho) > target);
  }
  return x;
}

CpoStepResult solve_cpo_step(const CpoSubproblem& sub, double delta) {
  if (delta <= 0.0) throw ConfigError("solve_cpo_step: delta must be positive");
  constexpr double kTiny = 1e-12;
  CpoStepResult out;

  if (sub.s <= kTiny) {
    // no usable cost gradient
    if (sub.c > 0.0) {
      out.kase = CpoCase::kDegenerate;  // infeasible with nothing to push against
      out.direction = Vec::Zero(sub.g.size());
      return out;
    }
    if (sub.q <= kTiny) {
      out.kase = CpoCase::kFeasible;  // nothing to do at all
      out.direction = Vec::Zero(sub.g.size());
      return out;
    }
    out.kase = CpoCase::kFeasible;  // pure trust-region step
    out.direction = std::sqrt(2.0 * delta / sub.q) * sub.hinv_g;
    return out;
  }

  const double reach = std::sqrt(2.0 * delta * sub.s);  // most the cost can drop in-region
  if (sub.c > 0.0 && (sub.c >= reach || sub.q <= kTiny)) {
    out.kase = CpoCase::kInfeasibleRecovery;
    out.direction = -std::sqrt(2.0 * delta / sub.s) * sub.hinv_b;
    return out;
  }

  out.kase = CpoCase::kFeasible;
  if (sub.q <= kTiny) {
    // nothing to gain; stay strictly inside the cost boundary
    out.direction = (sub.c > 0.0 ? -(sub.c / sub.s) : 0.0) * sub.hinv_b;
    return out;
  }

  // dual over (lambda, nu): x = (H^-1 g - nu H^-1 b) / lambda with
  //   nu* = max(0, (r + c*sqrt((qs - r^2)/(2*delta*s - c^2))) / s)
  //   lambda* = sqrt(|g - nu b|_{H^-1}^2 / (2*delta))
  const double k = 2.0 * delta * sub.s - sub.c * sub.c;
  const double ortho = std::max(0.0, sub.q * sub.s - sub.r * sub.r);
  double nu = 0.0;
  if (k > kTiny) nu = std::max(0.0, (sub.r + sub.c * std::sqrt(ortho / k)) / sub.s);
  const double a2 = 0.5 * (sub.q - 2.0 * nu * sub.r + nu * nu * sub.s);
  if (a2 <= kTiny) {
    // objective gradient lies along the constraint normal: land on the
    // cost boundary
    out.direction = -(std::max(sub.c, 0.0) / sub.s) * sub.hinv_b;
    return out;
  }
  const double lambda = std::sqrt(a2 / delta);
  out.direction = (sub.hinv_g - nu * sub.hinv_b) / lambda;
  return out;
}

namespace {

double surrogate_reward(const Policy& policy, const Mat& states, const Mat& actions,
                        const Vec& behavior_log_probs, const Vec& adv) {
  const Vec logp = policy.log_prob_batch(states, actions);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < adv.size(); ++i)
    acc += std::exp(logp[i] - behavior_log_probs[i]) * adv[i];
  return acc / static_cast<double>(adv.size());
}

}  // namespace

LineSearchResult line_search(Policy& policy, const Policy& anchor, const Mat& states,
                             const Mat& actions, const Vec& behavior_log_probs,
                             const Vec& reward_adv, const Vec& cost_adv_scaled,
                             double cost_estimate, const Vec& direction, CpoCase kase,
                             const CpoConfig& cfg) {
  if (cfg.backtrack_coef <= 0.0 || cfg.backtrack_coef >= 1.0)
    throw ConfigError("line_search: backtrack coefficient must lie in (0,1)");
  const Vec theta0 = anchor.get_params();

  // baselines at theta_k (ratio = 1)
  const double reward0 = reward_adv.mean();
  const double cost_adv0 = cost_adv_scaled.mean();
  // the surrogate cost is centred so that it equals J_C at theta_k
  const double cost_cap = std::max(cost_estimate, cfg.cost_limit) + tol::kLinearSlack;

  LineSearchResult out;
  double scale = 1.0;
  for (int j = 0; j <= cfg.backtrack_steps; ++j, scale *= cfg.backtrack_coef) {
    policy.set_params(theta0 + scale * direction);
    const double kl = policy.mean_kl_from(anchor, states);
    const double sur_r =
        surrogate_reward(policy, states, actions, behavior_log_probs, reward_adv);
    const double sur_c_raw =
        surrogate_reward(policy, states, actions, behavior_log_probs, cost_adv_scaled);
    const double sur_cost = cost_estimate + (sur_c_raw - cost_adv0);

    if (!std::isfinite(kl) || !std::isfinite(sur_r) || !std::isfinite(sur_cost)) continue;
    if (kl > cfg.delta) continue;
    if (kase == CpoCase::kInfeasibleRecovery) {
      if (sur_cost >= cost_estimate) continue;  // recovery must strictly improve cost
    } else {
      if (sur_cost > cost_cap) continue;
      if (sur_r < reward0 - tol::kLinearSlack) continue;
    }
    out.accepted = true;
    out.steps_tried = j;
    out.kl = kl;
    out.surrogate_reward = sur_r;
    out.surrogate_cost = sur_cost;
    return out;
  }
  policy.set_params(theta0);
  out.accepted = false;
  out.steps_tried = cfg.backtrack_steps + 1;
  out.kl = 0.0;
  out.surrogate_reward = reward0;
  out.surrogate_cost = cost_estimate;
  return out;
}

// ---------------------------------------------------------------------------

CpoLearner::CpoLearner(std::unique_ptr<Policy> policy, ValueNet reward_critic,
                       ValueNet cost_critic, CpoConfig cfg, uint64_t seed)
    : policy_(std::move(policy)),
      reward_critic_(std::move(reward_critic)),
      cost_critic_(std::move(cost_critic)),
      reward_critic_opt_(reward_critic_.param_count(), cfg.critic_lr),
      cost_critic_opt_(cost_critic_.param_count(), cfg.critic_lr),
      cfg_(cfg),
      shuffle_rng_(make_stream(seed, 0xFF02)) {
  if (cfg_.delta <= 0.0) throw ConfigError("CpoLearner: delta must be positive");
  if (cfg_.damping <= 0.0) throw ConfigError("CpoLearner: damping must be positive");
}

void CpoLearner::on_task_start(const TaskId& /*task*/, const std::vector<uint8_t>& mask) {
  policy_->set_action_mask(mask);
}

namespace {

double fit_critic(ValueNet& critic, AdamOptimizer& opt, const Mat& states,
                  const Vec& targets, int epochs, int minibatch, Rng& rng) {
  const Eigen::Index n = states.cols();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  double last_loss = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += minibatch) {
      const Eigen::Index count = std::min<Eigen::Index>(minibatch, n - start);
      Mat mb_states(states.rows(), count);
      Vec mb_targets(count);
      for (Eigen::Index k = 0; k < count; ++k) {
        mb_states.col(k) = states.col(order[start + k]);
        mb_targets[k] = targets[order[start + k]];
      }
      MlpCache cache;
      const Mat v = critic.net().forward(mb_states, cache);
      Mat diff = v;
      diff.row(0) -= mb_targets.transpose();
      last_loss = 0.5 * diff.row(0).squaredNorm() / static_cast<double>(count);
      const Vec grad = critic.net().backward(cache, diff / static_cast<double>(count));
      Vec params = critic.net().flatten();
      opt.step(params, grad);
      critic.net().unflatten(params);
    }
  }
  return last_loss;
}

}  // namespace

IterationDiagnostics CpoLearner::update(const TrajectoryBatch& batch) {
  const AdvantageSet adv =
      compute_advantages(batch, cfg_.gamma, cfg_.gae_lambda, true, nullptr);
  last_ = CpoIterationStats{};
  last_.cost_estimate = adv.mean_episode_cost;

  // the (1/(1-gamma)) factor of the constraint linearization folds into the
  // cost-advantage scaling so b matches J_C's episodic accounting
  const double cost_scale = 1.0 / (1.0 - cfg_.gamma);
  const Vec cost_adv_scaled = cost_scale * adv.cost_adv;

  const Eigen::Index n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vec g = policy_->weighted_score(batch.states, batch.actions, adv.reward_adv * inv_n);
  Vec b = policy_->weighted_score(batch.states, batch.actions, cost_adv_scaled * inv_n);
  const double c = adv.mean_episode_cost - cfg_.cost_limit;
  if (b.norm() < 1e-10) b.setZero();

  const auto kl_op = policy_->kl_hessian(batch.states);
  const double damping = cfg_.damping;
  auto hv = [&](const Vec& v) -> Vec { return kl_op->apply(v) + damping * v; };

  CpoSubproblem sub;
  sub.g = g;
  sub.b = b;
  sub.c = c;
  sub.hinv_g = conjugate_gradient(hv, g, cfg_.cg_iters, cfg_.cg_tol, &last_.cg_objective);
  sub.q = g.dot(sub.hinv_g);
  if (b.isZero(0.0)) {
    sub.hinv_b = Vec::Zero(b.size());
    sub.r = 0.0;
    sub.s = 0.0;
  } else {
    sub.hinv_b =
        conjugate_gradient(hv, b, cfg_.cg_iters, cfg_.cg_tol, &last_.cg_constraint);
    sub.r = g.dot(sub.hinv_b);
    sub.s = b.dot(sub.hinv_b);
  }

  const CpoStepResult step = solve_cpo_step(sub, cfg_.delta);
  last_.kase = step.kase;

  if (step.kase != CpoCase::kDegenerate) {
    const std::unique_ptr<Policy> anchor = policy_->clone();
    const LineSearchResult ls = line_search(
        *policy_, *anchor, batch.states, batch.actions, batch.log_probs, adv.reward_adv,
        cost_adv_scaled, adv.mean_episode_cost, step.direction, step.kase, cfg_);
    last_.accepted = ls.accepted;
    last_.backtracks = ls.steps_tried;
    last_.kl = ls.kl;
  }

  last_.critic_loss = fit_critic(reward_critic_, reward_critic_opt_, batch.states,
                                 adv.reward_returns, cfg_.critic_epochs,
                                 cfg_.critic_minibatch, shuffle_rng_);
  last_.cost_critic_loss = fit_critic(cost_critic_, cost_critic_opt_, batch.states,
                                      adv.cost_returns, cfg_.critic_epochs,
                                      cfg_.critic_minibatch, shuffle_rng_);

  IterationDiagnostics diag;
  fill_episode_stats(batch, diag);
  diag.kl = last_.kl;
  diag.cost_estimate = adv.mean_episode_cost;
  diag.cpo_case = to_string(last_.kase);
  diag.degraded = !last_.accepted && last_.kase != CpoCase::kDegenerate;
  return diag;
}

}  // namespace safecrl
