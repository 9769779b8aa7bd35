#pragma once

#include <deque>
#include <memory>

#include "safecrl/agents/learner.hpp"
#include "safecrl/numcore/adam.hpp"
#include "safecrl/rollout/advantage.hpp"

namespace safecrl {

struct PpoConfig {
  double clip_eps = 0.2;
  int epochs = 10;
  int minibatch = 64;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
};

struct SurrogateEval {
  double loss = 0.0;  // -mean(min(ratio*A, clip(ratio)*A))
  Vec grad;
  double clip_fraction = 0.0;
};

/// Clipped-surrogate actor objective and its exact gradient at the current
/// parameters.
SurrogateEval clipped_surrogate(const Policy& policy, const Mat& states, const Mat& actions,
                                const Vec& behavior_log_probs, const Vec& advantages,
                                double clip_eps);

struct PpoUpdateStats {
  double actor_loss = 0.0;   // mean minibatch loss including EWC terms
  double critic_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  EwcPenalty ewc;  // evaluated at the post-update parameters
  bool rolled_back = false;
};

/// One PPO iteration over the batch: `epochs` passes of minibatched Adam on
/// the clipped surrogate (actor, plus the summed EWC penalties) and the
/// value regression (critic). A non-finite loss anywhere rolls the whole
/// iteration back to its starting parameters.
PpoUpdateStats ppo_update(Policy& policy, ValueNet& critic, AdamOptimizer& actor_opt,
                          AdamOptimizer& critic_opt, const TrajectoryBatch& batch,
                          const AdvantageSet& adv, const PpoConfig& cfg,
                          const std::vector<TaskSnapshot>& snapshots, double lambda,
                          Rng& shuffle_rng);

/// PPO agent with optional per-task elastic weight consolidation and
/// optional cost-shaped rewards; lambda = 0 with shaping disabled reproduces
/// plain PPO bit for bit.
class PpoLearner final : public Learner {
 public:
  PpoLearner(std::unique_ptr<Policy> policy, ValueNet reward_critic, PpoConfig cfg,
             EwcConfig ewc, ShapingConfig shaping, uint64_t seed);

  IterationDiagnostics update(const TrajectoryBatch& batch) override;
  Policy& policy() override { return *policy_; }
  const Policy& policy() const override { return *policy_; }
  const ValueNet& reward_critic() const override { return reward_critic_; }
  const ValueNet& cost_critic() const override { return cost_critic_; }

  void on_task_start(const TaskId& task, const std::vector<uint8_t>& mask) override;
  void on_task_boundary(const TaskId& finished_task, int segment) override;
  const SnapshotStore* snapshot_store() const override { return &store_; }

  const EwcConfig& ewc_config() const { return ewc_; }
  const ShapingConfig& shaping_config() const { return shaping_; }
  const std::deque<CompletedEpisode>& fisher_window() const { return fisher_window_; }

 private:
  std::unique_ptr<Policy> policy_;
  ValueNet reward_critic_;
  ValueNet cost_critic_;  // records cost values for the batch; never trained
  AdamOptimizer actor_opt_;
  AdamOptimizer critic_opt_;
  PpoConfig cfg_;
  EwcConfig ewc_;
  ShapingConfig shaping_;
  SnapshotStore store_;
  std::deque<CompletedEpisode> fisher_window_;
  Rng shuffle_rng_;
};

}  // namespace safecrl
