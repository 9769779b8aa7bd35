#include "safecrl/numcore/adam.hpp"

#include <cmath>
#include <string>

namespace safecrl {

void AdamOptimizer::step(Vec& params, const Vec& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ConfigError("AdamOptimizer::step: shape mismatch");
  if (!grad.allFinite()) {
    Eigen::Index bad = 0;
    for (Eigen::Index i = 0; i < grad.size(); ++i)
      if (!std::isfinite(grad[i])) { bad = i; break; }
    throw NumericError("AdamOptimizer::step: non-finite gradient at index " +
                       std::to_string(bad) + " value " + std::to_string(grad[bad]));
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_.array() + (1.0 - beta2_) * grad.array().square();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace safecrl
