#include "safecrl/numcore/policy.hpp"

#include <cmath>
#include <limits>

namespace safecrl {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

class GaussianKlOp final : public KlOperator {
 public:
  GaussianKlOp(Mlp net, MlpCache cache, Vec inv_var, int logstd_dim)
      : net_(std::move(net)), cache_(std::move(cache)), inv_var_(std::move(inv_var)),
        logstd_dim_(logstd_dim) {}

  Vec apply(const Vec& v) const override {
    const Eigen::Index n = cache_.input.cols();
    const int mlp_dim = net_.param_count();
    Mat t = net_.jvp(cache_, v.head(mlp_dim));           // d(mean) along v
    t.array().colwise() *= inv_var_.array();             // 1/sigma^2 metric
    Vec out(dim());
    out.head(mlp_dim) = net_.backward(cache_, t) / static_cast<double>(n);
    out.tail(logstd_dim_) = 2.0 * v.tail(logstd_dim_);
    return out;
  }
  int dim() const override { return net_.param_count() + logstd_dim_; }

 private:
  Mlp net_;
  MlpCache cache_;
  Vec inv_var_;
  int logstd_dim_;
};

class CategoricalKlOp final : public KlOperator {
 public:
  CategoricalKlOp(Mlp net, MlpCache cache, Mat probs)
      : net_(std::move(net)), cache_(std::move(cache)), probs_(std::move(probs)) {}

  Vec apply(const Vec& v) const override {
    const Eigen::Index n = cache_.input.cols();
    Mat u = net_.jvp(cache_, v);  // d(logits) along v
    // Fisher of the softmax in logit space: diag(p) - p p^T, per sample
    Mat w = probs_.array() * u.array();
    Vec colsum = w.colwise().sum();
    w.noalias() -= probs_ * colsum.asDiagonal();
    return net_.backward(cache_, w) / static_cast<double>(n);
  }
  int dim() const override { return net_.param_count(); }

 private:
  Mlp net_;
  MlpCache cache_;
  Mat probs_;
};

}  // namespace

double diag_gaussian_kl(const Vec& mean_p, const Vec& log_std_p, const Vec& mean_q,
                        const Vec& log_std_q) {
  if (mean_p.size() != mean_q.size() || log_std_p.size() != log_std_q.size() ||
      mean_p.size() != log_std_p.size())
    throw ConfigError("diag_gaussian_kl: dimension mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mean_p.size(); ++i) {
    const double var_ratio = std::exp(2.0 * (log_std_p[i] - log_std_q[i]));
    const double md = mean_p[i] - mean_q[i];
    kl += log_std_q[i] - log_std_p[i] +
          0.5 * (var_ratio + md * md * std::exp(-2.0 * log_std_q[i]) - 1.0);
  }
  return kl;
}

double diag_gaussian_log_prob(const Vec& mean, const Vec& log_std, const Vec& action) {
  if (mean.size() != action.size() || mean.size() != log_std.size())
    throw ConfigError("diag_gaussian_log_prob: dimension mismatch");
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * kLogTwoPi;
  }
  return lp;
}

// ---------------------------------------------------------------------------
// DiagGaussianPolicy

DiagGaussianPolicy::DiagGaussianPolicy(int obs_dim, int act_dim,
                                       const std::vector<int>& hidden, double log_std_init) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(act_dim);
  mean_net_ = Mlp(sizes);
  log_std_ = Vec::Constant(act_dim, log_std_init);
}

std::unique_ptr<Policy> DiagGaussianPolicy::clone() const {
  return std::make_unique<DiagGaussianPolicy>(*this);
}

int DiagGaussianPolicy::param_count() const {
  return mean_net_.param_count() + static_cast<int>(log_std_.size());
}

Vec DiagGaussianPolicy::get_params() const {
  Vec flat(param_count());
  flat.head(mean_net_.param_count()) = mean_net_.flatten();
  flat.tail(log_std_.size()) = log_std_;
  return flat;
}

void DiagGaussianPolicy::set_params(const Vec& flat) {
  if (flat.size() != param_count())
    throw ConfigError("DiagGaussianPolicy::set_params: length mismatch");
  mean_net_.unflatten(flat.head(mean_net_.param_count()));
  log_std_ = flat.tail(log_std_.size());
}

Vec DiagGaussianPolicy::mean_of(const Vec& state) const {
  Vec mean = mean_net_.forward(state);
  if (!mean.allFinite())
    throw NumericError("DiagGaussianPolicy: non-finite policy mean");
  return mean;
}

ActionSample DiagGaussianPolicy::sample(const Vec& state, Rng& rng) const {
  const Vec mean = mean_of(state);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec action(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i)
    action[i] = mean[i] + std::exp(log_std_[i]) * normal(rng);
  return {action, diag_gaussian_log_prob(mean, log_std_, action)};
}

Vec DiagGaussianPolicy::act_greedy(const Vec& state) const { return mean_of(state); }

double DiagGaussianPolicy::log_prob(const Vec& state, const Vec& action) const {
  return diag_gaussian_log_prob(mean_of(state), log_std_, action);
}

Vec DiagGaussianPolicy::log_prob_batch(const Mat& states, const Mat& actions) const {
  MlpCache cache;
  const Mat means = mean_net_.forward(states, cache);
  if (!means.allFinite()) throw NumericError("DiagGaussianPolicy: non-finite policy mean");
  Vec out(states.cols());
  const Vec inv_std = (-log_std_.array()).exp();
  for (Eigen::Index n = 0; n < states.cols(); ++n) {
    const Vec z = (actions.col(n) - means.col(n)).array() * inv_std.array();
    out[n] = -0.5 * z.squaredNorm() - log_std_.sum() -
             0.5 * kLogTwoPi * static_cast<double>(log_std_.size());
  }
  return out;
}

Vec DiagGaussianPolicy::weighted_score(const Mat& states, const Mat& actions,
                                       const Vec& weights) const {
  MlpCache cache;
  const Mat means = mean_net_.forward(states, cache);
  const Vec inv_var = (-2.0 * log_std_.array()).exp();
  Mat dmean = (actions - means).array().colwise() * inv_var.array();
  dmean *= weights.asDiagonal();
  Vec grad(param_count());
  grad.head(mean_net_.param_count()) = mean_net_.backward(cache, dmean);
  // d log p / d log_std_i = ((a_i - mu_i)/sigma_i)^2 - 1
  Vec glogstd = Vec::Zero(log_std_.size());
  for (Eigen::Index n = 0; n < states.cols(); ++n) {
    const Vec z2 = ((actions.col(n) - means.col(n)).array() * (-log_std_.array()).exp())
                       .square();
    glogstd += weights[n] * (z2.array() - 1.0).matrix();
  }
  grad.tail(log_std_.size()) = glogstd;
  return grad;
}

Vec DiagGaussianPolicy::score_square_sum(const Mat& states, const Mat& actions) const {
  Vec acc = Vec::Zero(param_count());
  MlpCache cache;
  const Vec inv_var = (-2.0 * log_std_.array()).exp();
  for (Eigen::Index n = 0; n < states.cols(); ++n) {
    const Mat mean = mean_net_.forward(states.col(n), cache);
    const Mat dmean = (actions.col(n) - mean.col(0)).array() * inv_var.array();
    const Vec gm = mean_net_.backward(cache, dmean);
    acc.head(mean_net_.param_count()).array() += gm.array().square();
    const Vec z2 = ((actions.col(n) - mean.col(0)).array() * (-log_std_.array()).exp())
                       .square();
    acc.tail(log_std_.size()).array() += (z2.array() - 1.0).square();
  }
  return acc;
}

double DiagGaussianPolicy::mean_kl_from(const Policy& anchor, const Mat& states) const {
  const auto* other = dynamic_cast<const DiagGaussianPolicy*>(&anchor);
  if (other == nullptr)
    throw ConfigError("mean_kl_from: anchor policy type mismatch");
  MlpCache cache_p, cache_q;
  const Mat mean_p = mean_net_.forward(states, cache_p);
  const Mat mean_q = other->mean_net_.forward(states, cache_q);
  double acc = 0.0;
  for (Eigen::Index n = 0; n < states.cols(); ++n)
    acc += diag_gaussian_kl(mean_p.col(n), log_std_, mean_q.col(n), other->log_std_);
  return acc / static_cast<double>(states.cols());
}

std::unique_ptr<KlOperator> DiagGaussianPolicy::kl_hessian(const Mat& states) const {
  MlpCache cache;
  mean_net_.forward(states, cache);
  const Vec inv_var = (-2.0 * log_std_.array()).exp();
  return std::make_unique<GaussianKlOp>(mean_net_, std::move(cache), inv_var,
                                        static_cast<int>(log_std_.size()));
}

// ---------------------------------------------------------------------------
// CategoricalPolicy

CategoricalPolicy::CategoricalPolicy(int obs_dim, int n_actions,
                                     const std::vector<int>& hidden) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(n_actions);
  logits_net_ = Mlp(sizes);
}

std::unique_ptr<Policy> CategoricalPolicy::clone() const {
  return std::make_unique<CategoricalPolicy>(*this);
}

void CategoricalPolicy::set_action_mask(const std::vector<uint8_t>& mask) {
  if (!mask.empty() && static_cast<int>(mask.size()) != num_actions())
    throw ConfigError("CategoricalPolicy: mask length mismatch");
  if (!mask.empty()) {
    bool any = false;
    for (uint8_t m : mask) any = any || (m != 0);
    if (!any) throw ConfigError("CategoricalPolicy: mask disables every action");
  }
  mask_ = mask;
}

Mat CategoricalPolicy::masked_probs(const Mat& logits) const {
  Mat p(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.cols(); ++n) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
      if (mask_.empty() || mask_[i]) mx = std::max(mx, logits(i, n));
    double z = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const bool ok = mask_.empty() || mask_[i];
      p(i, n) = ok ? std::exp(logits(i, n) - mx) : 0.0;
      z += p(i, n);
    }
    p.col(n) /= z;
  }
  return p;
}

Vec CategoricalPolicy::probs(const Vec& state) const {
  MlpCache cache;
  Mat logits = logits_net_.forward(Mat(state), cache);
  if (!logits.allFinite()) throw NumericError("CategoricalPolicy: non-finite logits");
  return masked_probs(logits).col(0);
}

ActionSample CategoricalPolicy::sample(const Vec& state, Rng& rng) const {
  const Vec p = probs(state);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  int pick = -1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    pick = static_cast<int>(i);
    if (u < acc) break;
  }
  Vec action(1);
  action[0] = static_cast<double>(pick);
  return {action, std::log(p[pick])};
}

Vec CategoricalPolicy::act_greedy(const Vec& state) const {
  const Vec p = probs(state);
  Eigen::Index best = 0;
  p.maxCoeff(&best);
  Vec action(1);
  action[0] = static_cast<double>(best);
  return action;
}

double CategoricalPolicy::log_prob(const Vec& state, const Vec& action) const {
  const Vec p = probs(state);
  const int a = static_cast<int>(action[0]);
  if (a < 0 || a >= num_actions() || p[a] <= 0.0)
    throw ConfigError("CategoricalPolicy::log_prob: action outside the valid support");
  return std::log(p[a]);
}

Vec CategoricalPolicy::log_prob_batch(const Mat& states, const Mat& actions) const {
  MlpCache cache;
  const Mat p = masked_probs(logits_net_.forward(states, cache));
  Vec out(states.cols());
  for (Eigen::Index n = 0; n < states.cols(); ++n) {
    const int a = static_cast<int>(actions(0, n));
    if (a < 0 || a >= num_actions() || p(a, n) <= 0.0)
      throw ConfigError("CategoricalPolicy::log_prob_batch: invalid action in batch");
    out[n] = std::log(p(a, n));
  }
  return out;
}

Vec CategoricalPolicy::weighted_score(const Mat& states, const Mat& actions,
                                      const Vec& weights) const {
  MlpCache cache;
  const Mat p = masked_probs(logits_net_.forward(states, cache));
  Mat dlogits = -p;
  for (Eigen::Index n = 0; n < states.cols(); ++n)
    dlogits(static_cast<int>(actions(0, n)), n) += 1.0;
  dlogits *= weights.asDiagonal();
  return logits_net_.backward(cache, dlogits);
}

Vec CategoricalPolicy::score_square_sum(const Mat& states, const Mat& actions) const {
  Vec acc = Vec::Zero(param_count());
  MlpCache cache;
  for (Eigen::Index n = 0; n < states.cols(); ++n) {
    const Mat p = masked_probs(logits_net_.forward(states.col(n), cache));
    Mat dlogits = -p;
    dlogits(static_cast<int>(actions(0, n)), 0) += 1.0;
    acc.array() += logits_net_.backward(cache, dlogits).array().square();
  }
  return acc;
}

double CategoricalPolicy::mean_kl_from(const Policy& anchor, const Mat& states) const {
  const auto* other = dynamic_cast<const CategoricalPolicy*>(&anchor);
  if (other == nullptr)
    throw ConfigError("mean_kl_from: anchor policy type mismatch");
  MlpCache cache_p, cache_q;
  const Mat pp = masked_probs(logits_net_.forward(states, cache_p));
  const Mat pq = other->masked_probs(other->logits_net_.forward(states, cache_q));
  double acc = 0.0;
  for (Eigen::Index n = 0; n < states.cols(); ++n) {
    for (Eigen::Index i = 0; i < pp.rows(); ++i) {
      if (pp(i, n) <= 0.0) continue;
      acc += pp(i, n) * (std::log(pp(i, n)) - std::log(pq(i, n)));
    }
  }
  return acc / static_cast<double>(states.cols());
}

std::unique_ptr<KlOperator> CategoricalPolicy::kl_hessian(const Mat& states) const {
  MlpCache cache;
  const Mat p = masked_probs(logits_net_.forward(states, cache));
  return std::make_unique<CategoricalKlOp>(logits_net_, std::move(cache), p);
}

}  // namespace safecrl
