#include "safecrl/numcore/mlp.hpp"

#include <cmath>

namespace safecrl {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("Mlp: need at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw ConfigError("Mlp: layer sizes must be positive");
  param_count_ = 0;
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.emplace_back(Mat::Zero(sizes_[l + 1], sizes_[l]));
    biases_.emplace_back(Vec::Zero(sizes_[l + 1]));
    param_count_ += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
}

void Mlp::init_random(Rng& rng) {
  for (int l = 0; l < num_layers(); ++l) {
    if (l + 1 == num_layers()) {
      weights_[l].setZero();
      biases_[l].setZero();
      continue;
    }
    const double limit = std::sqrt(6.0 / (weights_[l].rows() + weights_[l].cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = dist(rng);
    biases_[l].setZero();
  }
}

void Mlp::init_uniform(double half_width, Rng& rng) {
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  for (int l = 0; l < num_layers(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = dist(rng);
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = dist(rng);
  }
}

Vec Mlp::flatten() const {
  Vec flat(param_count_);
  Eigen::Index pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    const Mat& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      flat.segment(pos, w.cols()) = w.row(r).transpose();
      pos += w.cols();
    }
    flat.segment(pos, biases_[l].size()) = biases_[l];
    pos += biases_[l].size();
  }
  return flat;
}

void Mlp::unflatten(const Vec& flat) {
  if (flat.size() != param_count_) throw ConfigError("Mlp::unflatten: length mismatch");
  Eigen::Index pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    Mat& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      w.row(r) = flat.segment(pos, w.cols()).transpose();
      pos += w.cols();
    }
    biases_[l] = flat.segment(pos, biases_[l].size());
    pos += biases_[l].size();
  }
}

Vec Mlp::forward(const Vec& input) const {
  MlpCache cache;
  return forward(Mat(input), cache).col(0);
}

Mat Mlp::forward(const Mat& inputs, MlpCache& cache) const {
  if (inputs.rows() != input_dim())
    throw ConfigError("Mlp::forward: input dimension mismatch");
  cache.input = inputs;
  cache.act.clear();
  cache.act.reserve(weights_.size());
  Mat cur = inputs;
  for (int l = 0; l < num_layers(); ++l) {
    Mat pre = (weights_[l] * cur).colwise() + biases_[l];
    if (l + 1 < num_layers()) pre = pre.array().tanh();
    cache.act.push_back(pre);
    cur = std::move(pre);
  }
  return cache.act.back();
}

Vec Mlp::backward(const MlpCache& cache, const Mat& output_grads) const {
  if (cache.act.size() != weights_.size())
    throw NumericError("Mlp::backward: no cached forward pass");
  if (output_grads.rows() != output_dim() || output_grads.cols() != cache.input.cols())
    throw ConfigError("Mlp::backward: output grad shape mismatch");

  Vec flat = Vec::Zero(param_count_);
  // gradient offsets per layer in the canonical flat order
  std::vector<Eigen::Index> offset(weights_.size());
  Eigen::Index pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offset[l] = pos;
    pos += weights_[l].size() + biases_[l].size();
  }

  Mat delta = output_grads;  // linear output layer
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Mat& below = (l == 0) ? cache.input : cache.act[l - 1];
    Mat gw = delta * below.transpose();
    Vec gb = delta.rowwise().sum();
    Eigen::Index p = offset[l];
    for (Eigen::Index r = 0; r < gw.rows(); ++r) {
      flat.segment(p, gw.cols()) = gw.row(r).transpose();
      p += gw.cols();
    }
    flat.segment(p, gb.size()) = gb;
    if (l > 0) {
      delta = (weights_[l].transpose() * delta).array() *
              (1.0 - cache.act[l - 1].array().square());
    }
  }
  return flat;
}

Mat Mlp::jvp(const MlpCache& cache, const Vec& tangent) const {
  if (cache.act.size() != weights_.size())
    throw NumericError("Mlp::jvp: no cached forward pass");
  if (tangent.size() != param_count_) throw ConfigError("Mlp::jvp: tangent length mismatch");

  const Eigen::Index n = cache.input.cols();
  Mat t_act;  // tangent of the running activation
  Eigen::Index pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    const Mat& below = (l == 0) ? cache.input : cache.act[l - 1];
    Mat tw(weights_[l].rows(), weights_[l].cols());
    for (Eigen::Index r = 0; r < tw.rows(); ++r) {
      tw.row(r) = tangent.segment(pos, tw.cols()).transpose();
      pos += tw.cols();
    }
    Vec tb = tangent.segment(pos, biases_[l].size());
    pos += biases_[l].size();

    Mat t_pre = (tw * below).colwise() + tb;
    if (l > 0) t_pre.noalias() += weights_[l] * t_act;
    if (l + 1 < num_layers()) {
      t_pre.array() *= 1.0 - cache.act[l].array().square();  // tanh'(pre) via activation
    }
    t_act = std::move(t_pre);
  }
  (void)n;
  return t_act;
}

void Mlp::check_sizes() const {}

}  // namespace safecrl
