#pragma once

#include "safecrl/envs/task.hpp"

namespace safecrl {

/// Planar point mass driven by six fixed-direction thrusters with linear
/// drag. The agent is rewarded for +x progress, penalized quadratically for
/// control effort, and incurs a unit cost on every step whose speed exceeds
/// the velocity limit. Faults zero out thruster columns by thrust direction:
/// `back` removes the thrusters pointing into -x, `front` those pointing
/// into +x, so each task needs a different control mix.
struct PointVelConfig {
  double dt = 0.05;
  double drag = 0.1;
  double v_max = 1.0;
  double alpha_ctrl = 0.01;
  double reset_noise = 0.05;
  double action_bound = 1.0;
  int horizon = 200;
  double gamma = 0.99;
  double cost_limit = 25.0;
};

class PointVelEnv final : public Env {
 public:
  explicit PointVelEnv(PointVelConfig config = {});

  CmdpSpec spec() const override;
  Vec reset(uint64_t seed) override;
  StepResult step(const Vec& action) override;
  void apply_task(const TaskId& task) override;
  TaskId active_task() const override { return task_; }
  std::vector<TaskId> valid_tasks() const override;
  int64_t clip_count() const override { return clip_count_; }

  /// Thrust map of the active task (2 x 6; zeroed columns under faults).
  const Mat& actuation() const { return b_active_; }
  /// Pristine thrust map shared by every instance.
  static Mat nominal_actuation();

  const PointVelConfig& config() const { return config_; }

 private:
  PointVelConfig config_;
  Mat b_nominal_;
  Mat b_active_;
  TaskId task_ = TaskId::nominal();
  Eigen::Vector2d pos_{0.0, 0.0};
  Eigen::Vector2d vel_{0.0, 0.0};
  int step_in_episode_ = 0;
  int64_t episode_counter_ = 0;
  int64_t clip_count_ = 0;
  uint64_t seed_ = 0;
  bool episode_open_ = false;
};

}  // namespace safecrl
