#include "safecrl/envs/pointvel.hpp"

#include <cmath>

namespace safecrl {

Mat PointVelEnv::nominal_actuation() {
  // unit thrust directions at 0, 60, ..., 300 degrees
  Mat b(2, 6);
  const double h = std::sqrt(3.0) / 2.0;
  b.col(0) << 1.0, 0.0;
  b.col(1) << 0.5, h;
  b.col(2) << -0.5, h;
  b.col(3) << -1.0, 0.0;
  b.col(4) << -0.5, -h;
  b.col(5) << 0.5, -h;
  return b;
}

PointVelEnv::PointVelEnv(PointVelConfig config)
    : config_(config), b_nominal_(nominal_actuation()), b_active_(b_nominal_) {}

CmdpSpec PointVelEnv::spec() const {
  CmdpSpec s;
  s.obs_dim = 2;
  s.act_dim = 6;
  s.num_actions = 0;
  s.gamma = config_.gamma;
  s.cost_limit = config_.cost_limit;
  s.horizon = config_.horizon;
  return s;
}

std::vector<TaskId> PointVelEnv::valid_tasks() const {
  return {TaskId::nominal(), TaskId::back(), TaskId::front()};
}

void PointVelEnv::apply_task(const TaskId& task) {
  bool known = false;
  for (const auto& t : valid_tasks()) known = known || (t == task);
  if (!known) throw ConfigError("PointVelEnv: unknown task " + to_string(task));
  b_active_ = b_nominal_;
  if (task.label == TaskLabel::kBack) {
    for (int j = 0; j < b_active_.cols(); ++j)
      if (b_nominal_(0, j) < 0.0) b_active_.col(j).setZero();
  } else if (task.label == TaskLabel::kFront) {
    for (int j = 0; j < b_active_.cols(); ++j)
      if (b_nominal_(0, j) > 0.0) b_active_.col(j).setZero();
  }
  task_ = task;
}

Vec PointVelEnv::reset(uint64_t seed) {
  seed_ = seed;
  Rng rng = make_stream(seed_, static_cast<uint64_t>(episode_counter_));
  ++episode_counter_;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  pos_.setZero();
  vel_[0] = config_.reset_noise * unif(rng);
  vel_[1] = config_.reset_noise * unif(rng);
  step_in_episode_ = 0;
  episode_open_ = true;
  return Vec(vel_);
}

StepResult PointVelEnv::step(const Vec& action) {
  if (!episode_open_) throw ConfigError("PointVelEnv::step: episode not open; call reset");
  if (action.size() != 6) throw ConfigError("PointVelEnv::step: action dimension mismatch");

  Vec u = action;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u[i] > config_.action_bound) { u[i] = config_.action_bound; ++clip_count_; }
    else if (u[i] < -config_.action_bound) { u[i] = -config_.action_bound; ++clip_count_; }
  }

  const Eigen::Vector2d force = b_active_ * u;
  const Eigen::Vector2d v_new = vel_ + (force - config_.drag * vel_) * config_.dt;
  const double x_old = pos_[0];
  pos_ += v_new * config_.dt;
  vel_ = v_new;
  ++step_in_episode_;

  StepResult out;
  out.next_obs = Vec(vel_);
  out.reward = (pos_[0] - x_old) - config_.alpha_ctrl * u.squaredNorm();
  out.cost = (v_new.norm() > config_.v_max) ? 1.0 : 0.0;
  out.terminated = false;
  out.truncated = (step_in_episode_ >= config_.horizon);
  if (out.truncated) episode_open_ = false;
  if (!out.next_obs.allFinite() || !std::isfinite(out.reward))
    throw NumericError("PointVelEnv::step: non-finite state or reward");
  return out;
}

}  // namespace safecrl
