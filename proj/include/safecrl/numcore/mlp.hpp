#pragma once

#include <vector>

#include "safecrl/common.hpp"

namespace safecrl {

/// Activations computed during a forward pass, kept around for backprop.
/// Samples are stored as columns.
struct MlpCache {
  Mat input;               // in x n
  std::vector<Mat> act;    // post-activation per layer, sizes[l+1] x n
};

/// Dense multilayer perceptron with tanh hidden layers and a linear output
/// layer. Parameters live in explicit weight/bias storage and can be viewed
/// as one flat vector in a canonical order: for each layer, the weight
/// matrix in row-major order (rows = output units) followed by the bias.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = [input_dim, hidden..., output_dim]; parameters start at zero.
  explicit Mlp(std::vector<int> sizes);

  /// Xavier-uniform hidden layers; output layer stays at zero so fresh
  /// policies are centred and fresh critics predict zero.
  void init_random(Rng& rng);
  /// Uniform initialization of every layer including the output (tests).
  void init_uniform(double half_width, Rng& rng);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  const std::vector<int>& sizes() const { return sizes_; }

  int param_count() const { return param_count_; }
  Vec flatten() const;
  void unflatten(const Vec& flat);

  Mat& weight(int layer) { return weights_[layer]; }
  const Mat& weight(int layer) const { return weights_[layer]; }
  Vec& bias(int layer) { return biases_[layer]; }
  const Vec& bias(int layer) const { return biases_[layer]; }

  Vec forward(const Vec& input) const;
  /// Batched forward over columns; fills `cache` for a later backward pass.
  Mat forward(const Mat& inputs, MlpCache& cache) const;

  /// Gradient of sum_n output(:,n)·output_grads(:,n) with respect to every
  /// parameter, flattened in canonical order. Requires the cache produced by
  /// the matching forward call.
  Vec backward(const MlpCache& cache, const Mat& output_grads) const;

  /// Directional derivative of the outputs along a flat parameter tangent:
  /// returns d/de output(theta + e*tangent) at e=0 for every cached sample.
  Mat jvp(const MlpCache& cache, const Vec& tangent) const;

 private:
  void check_sizes() const;

  std::vector<int> sizes_;
  std::vector<Mat> weights_;  // sizes[l+1] x sizes[l]
  std::vector<Vec> biases_;
  int param_count_ = 0;
};

}  // namespace safecrl
