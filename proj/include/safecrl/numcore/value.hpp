#pragma once

#include "safecrl/numcore/mlp.hpp"

namespace safecrl {

/// Scalar state-value head over an MLP body.
class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(int obs_dim, const std::vector<int>& hidden) {
    std::vector<int> sizes;
    sizes.push_back(obs_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    net_ = Mlp(sizes);
  }

  void init_random(Rng& rng) { net_.init_random(rng); }
  double value(const Vec& state) const { return net_.forward(state)[0]; }
  Vec values(const Mat& states) const {
    MlpCache cache;
    return net_.forward(states, cache).row(0).transpose();
  }

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  int param_count() const { return net_.param_count(); }

 private:
  Mlp net_;
};

}  // namespace safecrl
