#pragma once

#include <functional>
#include <memory>

#include "safecrl/agents/learner.hpp"
#include "safecrl/numcore/adam.hpp"
#include "safecrl/rollout/advantage.hpp"

namespace safecrl {

struct CpoConfig {
  double delta = 0.01;          // KL radius
  int cg_iters = 15;
  double cg_tol = 1e-8;         // relative residual target
  double damping = 0.1;         // added to the KL Hessian-vector products
  double backtrack_coef = 0.8;  // line-search shrink factor, in (0,1)
  int backtrack_steps = 10;
  double cost_limit = 25.0;     // d, per-episode
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int critic_epochs = 10;
  int critic_minibatch = 64;
  double critic_lr = 3e-4;
};

/// Linearized data of one constrained trust-region update:
///   maximize g'x  s.t.  c + b'x <= 0  and  (1/2) x'Hx <= delta
/// with q = g'H^-1 g, r = g'H^-1 b, s = b'H^-1 b and c = J_C - d.
struct CpoSubproblem {
  Vec g;
  Vec b;
  double c = 0.0;
  double q = 0.0;
  double r = 0.0;
  double s = 0.0;
  Vec hinv_g;
  Vec hinv_b;
};

enum class CpoCase { kFeasible, kInfeasibleRecovery, kDegenerate };
const char* to_string(CpoCase c);

struct CpoStepResult {
  Vec direction;  // full step x (zero for the degenerate case)
  CpoCase kase = CpoCase::kFeasible;
};

struct CgStats {
  int iterations = 0;
  double residual_norm = 0.0;
  double rhs_norm = 0.0;
  bool hit_cap = false;
};

/// Conjugate gradient on a symmetric positive definite operator; stops when
/// the residual norm drops below tol * |rhs| or after `iters` steps.
Vec conjugate_gradient(const std::function<Vec(const Vec&)>& hv, const Vec& rhs, int iters,
                       double tol, CgStats* stats = nullptr);

/// Closed-form dual solution of the two-constraint quadratic subproblem.
/// Recovery (c beyond trust-region reach) returns the pure cost-decrease
/// step -sqrt(2*delta/s) H^-1 b; an infeasible subproblem with no cost
/// gradient has no recovery direction and comes back degenerate.
CpoStepResult solve_cpo_step(const CpoSubproblem& sub, double delta);

struct LineSearchResult {
  bool accepted = false;
  int steps_tried = 0;  // j of the accepted point, or max+1 on rejection
  double kl = 0.0;
  double surrogate_reward = 0.0;
  double surrogate_cost = 0.0;
};

/// Backtracking safeguard on the true sampled quantities. Walks
/// theta_k + coef^j * x and accepts the first point whose sampled KL fits
/// the radius, whose cost surrogate does not worsen beyond the available
/// slack (feasible case) or strictly improves (recovery), and whose reward
/// surrogate does not degrade (feasible case only). On exhaustion the
/// policy is restored unchanged.
LineSearchResult line_search(Policy& policy, const Policy& anchor, const Mat& states,
                             const Mat& actions, const Vec& behavior_log_probs,
                             const Vec& reward_adv, const Vec& cost_adv_scaled,
                             double cost_estimate, const Vec& direction, CpoCase kase,
                             const CpoConfig& cfg);

struct CpoIterationStats {
  CpoCase kase = CpoCase::kFeasible;
  bool accepted = false;
  int backtracks = 0;
  double kl = 0.0;
  double cost_estimate = 0.0;  // J_C of the batch
  CgStats cg_objective;
  CgStats cg_constraint;
  double critic_loss = 0.0;
  double cost_critic_loss = 0.0;
};

/// Constrained Policy Optimization agent: trust-region constrained policy
/// updates plus regression fits for both critics. Carries no consolidation
/// machinery.
class CpoLearner final : public Learner {
 public:
  CpoLearner(std::unique_ptr<Policy> policy, ValueNet reward_critic, ValueNet cost_critic,
             CpoConfig cfg, uint64_t seed);

  IterationDiagnostics update(const TrajectoryBatch& batch) override;
  Policy& policy() override { return *policy_; }
  const Policy& policy() const override { return *policy_; }
  const ValueNet& reward_critic() const override { return reward_critic_; }
  const ValueNet& cost_critic() const override { return cost_critic_; }

  void on_task_start(const TaskId& task, const std::vector<uint8_t>& mask) override;
  void on_task_boundary(const TaskId& /*finished*/, int /*segment*/) override {}

  const CpoIterationStats& last_stats() const { return last_; }
  const CpoConfig& config() const { return cfg_; }

 private:
  std::unique_ptr<Policy> policy_;
  ValueNet reward_critic_;
  ValueNet cost_critic_;
  AdamOptimizer reward_critic_opt_;
  AdamOptimizer cost_critic_opt_;
  CpoConfig cfg_;
  Rng shuffle_rng_;
  CpoIterationStats last_;
};

}  // namespace safecrl
