#pragma once

#include "safecrl/common.hpp"

namespace safecrl {

/// Bias-corrected adaptive moment estimation on a flat parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(int dim, double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Vec::Zero(dim)), v_(Vec::Zero(dim)) {}

  /// Applies one update in place. Throws NumericError on a non-finite
  /// gradient component, leaving parameters and moments untouched.
  void step(Vec& params, const Vec& grad);

  void reset() { m_.setZero(); v_.setZero(); t_ = 0; }
  int64_t steps_taken() const { return t_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  Vec m_, v_;
  int64_t t_ = 0;
};

}  // namespace safecrl
