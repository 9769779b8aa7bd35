#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "safecrl/numcore/mlp.hpp"

namespace safecrl {

/// Linear operator for the exact Hessian of the state-averaged KL
/// theta' -> mean_s KL(pi_theta'(.|s) || pi_anchor(.|s)), evaluated at the
/// anchor parameters. At the anchor the per-state KL gradient vanishes, so
/// the Hessian reduces to the Gauss-Newton form J^T A J, which is applied
/// exactly via one tangent-forward and one backward pass.
class KlOperator {
 public:
  virtual ~KlOperator() = default;
  virtual Vec apply(const Vec& v) const = 0;
  virtual int dim() const = 0;
};

struct ActionSample {
  Vec action;
  double log_prob;
};

/// Stochastic policy over a fixed observation space. Actions are exchanged
/// as vectors; discrete policies store the action index in a length-1 vector.
/// Actor parameters are a single flat vector in a documented canonical order.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::unique_ptr<Policy> clone() const = 0;

  virtual int obs_dim() const = 0;
  virtual int action_size() const = 0;
  virtual int param_count() const = 0;
  virtual Vec get_params() const = 0;
  virtual void set_params(const Vec& flat) = 0;

  virtual ActionSample sample(const Vec& state, Rng& rng) const = 0;
  /// Noise-free action used for evaluation episodes: distribution mean for
  /// Gaussian policies, highest-probability action for categorical ones.
  virtual Vec act_greedy(const Vec& state) const = 0;

  virtual double log_prob(const Vec& state, const Vec& action) const = 0;
  virtual Vec log_prob_batch(const Mat& states, const Mat& actions) const = 0;

  /// Gradient of sum_n weights[n] * log pi(a_n|s_n) w.r.t. the flat params.
  virtual Vec weighted_score(const Mat& states, const Mat& actions,
                             const Vec& weights) const = 0;
  /// sum_n (d log pi(a_n|s_n) / d theta)^2, elementwise (empirical Fisher
  /// numerator).
  virtual Vec score_square_sum(const Mat& states, const Mat& actions) const = 0;

  /// mean_s KL(pi_this(.|s) || pi_anchor(.|s)); anchor must be the same
  /// concrete policy type.
  virtual double mean_kl_from(const Policy& anchor, const Mat& states) const = 0;
  virtual std::unique_ptr<KlOperator> kl_hessian(const Mat& states) const = 0;

  /// Restricts the sampling support (categorical only; no-op otherwise).
  virtual void set_action_mask(const std::vector<uint8_t>& /*mask*/) {}
  virtual std::vector<uint8_t> action_mask() const { return {}; }
};

/// Closed-form KL between diagonal Gaussians, summed over dimensions.
double diag_gaussian_kl(const Vec& mean_p, const Vec& log_std_p, const Vec& mean_q,
                        const Vec& log_std_q);

/// Exact diagonal-Gaussian log density.
double diag_gaussian_log_prob(const Vec& mean, const Vec& log_std, const Vec& action);

/// Gaussian policy with a state-dependent mean produced by an MLP and a
/// state-independent learned log standard deviation per action dimension.
/// Flat parameter order: mean network (canonical MLP order), then log_std.
class DiagGaussianPolicy final : public Policy {
 public:
  DiagGaussianPolicy(int obs_dim, int act_dim, const std::vector<int>& hidden,
                     double log_std_init = 0.0);

  std::unique_ptr<Policy> clone() const override;
  int obs_dim() const override { return mean_net_.input_dim(); }
  int action_size() const override { return static_cast<int>(log_std_.size()); }
  int param_count() const override;
  Vec get_params() const override;
  void set_params(const Vec& flat) override;

  ActionSample sample(const Vec& state, Rng& rng) const override;
  Vec act_greedy(const Vec& state) const override;
  double log_prob(const Vec& state, const Vec& action) const override;
  Vec log_prob_batch(const Mat& states, const Mat& actions) const override;
  Vec weighted_score(const Mat& states, const Mat& actions, const Vec& weights) const override;
  Vec score_square_sum(const Mat& states, const Mat& actions) const override;
  double mean_kl_from(const Policy& anchor, const Mat& states) const override;
  std::unique_ptr<KlOperator> kl_hessian(const Mat& states) const override;

  void init_random(Rng& rng) { mean_net_.init_random(rng); }
  Mlp& mean_net() { return mean_net_; }
  const Mlp& mean_net() const { return mean_net_; }
  const Vec& log_std() const { return log_std_; }
  Vec& log_std() { return log_std_; }

 private:
  Vec mean_of(const Vec& state) const;

  Mlp mean_net_;
  Vec log_std_;
};

/// Softmax policy over a finite action set with optional support masking;
/// masked actions have probability zero and are never sampled. Flat
/// parameters are exactly the logit network's.
class CategoricalPolicy final : public Policy {
 public:
  CategoricalPolicy(int obs_dim, int n_actions, const std::vector<int>& hidden);

  std::unique_ptr<Policy> clone() const override;
  int obs_dim() const override { return logits_net_.input_dim(); }
  int action_size() const override { return 1; }
  int num_actions() const { return logits_net_.output_dim(); }
  int param_count() const override { return logits_net_.param_count(); }
  Vec get_params() const override { return logits_net_.flatten(); }
  void set_params(const Vec& flat) override { logits_net_.unflatten(flat); }

  ActionSample sample(const Vec& state, Rng& rng) const override;
  Vec act_greedy(const Vec& state) const override;
  double log_prob(const Vec& state, const Vec& action) const override;
  Vec log_prob_batch(const Mat& states, const Mat& actions) const override;
  Vec weighted_score(const Mat& states, const Mat& actions, const Vec& weights) const override;
  Vec score_square_sum(const Mat& states, const Mat& actions) const override;
  double mean_kl_from(const Policy& anchor, const Mat& states) const override;
  std::unique_ptr<KlOperator> kl_hessian(const Mat& states) const override;

  void set_action_mask(const std::vector<uint8_t>& mask) override;
  std::vector<uint8_t> action_mask() const override { return mask_; }

  void init_random(Rng& rng) { logits_net_.init_random(rng); }
  Mlp& logits_net() { return logits_net_; }

  /// Masked action probabilities at one state.
  Vec probs(const Vec& state) const;

 private:
  Mat masked_probs(const Mat& logits) const;  // columns = samples

  Mlp logits_net_;
  std::vector<uint8_t> mask_;  // empty means every action is valid
};

}  // namespace safecrl
