#pragma once

#include <cmath>
#include <functional>

#include "safecrl/common.hpp"

namespace safecrl::test {

/// Central finite differences of a scalar function of a flat vector.
inline Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& at,
                            double h = 1e-5) {
  Vec grad(at.size());
  Vec x = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Largest relative error between two gradients, guarding tiny denominators.
inline double max_rel_err(const Vec& got, const Vec& want, double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i) {
    const double denom = std::max(std::abs(want[i]), floor);
    worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
  }
  return worst;
}

}  // namespace safecrl::test
