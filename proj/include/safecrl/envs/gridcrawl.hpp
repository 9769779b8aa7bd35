#pragma once

#include <utility>
#include <vector>

#include "safecrl/envs/task.hpp"

namespace safecrl {

/// Deterministic tabular CMDP extracted from a GridCrawl task; feeds the
/// constrained-optimum solver. State -1 encodes the absorbing done-state.
struct TabularCmdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<uint8_t> action_valid;  // global action mask for the task
  Eigen::MatrixXi next;               // n_states x n_actions, -1 = absorbed
  Mat reward;                         // n_states x n_actions
  Mat cost;                           // n_states x n_actions
  int start_state = 0;
  double gamma = 0.99;
};

/// Small grid world where the agent crawls rightward to a goal column.
/// `walk` advances one column, `stride` two (striding skips over the cell in
/// between), `up`/`down` change rows; moves clip at the grid edges. Landing
/// on a hazard cell costs 1. Faults mask out actions: `back` loses the
/// stride, `front` loses both stride and climbing up. The default layout
/// gives each task a different constrained optimum: a hazard corridor spans
/// the middle row, the top row is clean but only worth taking with a stride
/// or a long walk, and the bottom row is pocked so the front task has to
/// choose between paying cost and barely progressing.
struct GridCrawlConfig {
  int rows = 3;
  int cols = 6;
  int start_row = 1;
  int start_col = 0;
  std::vector<std::pair<int, int>> hazards = {{1, 1}, {1, 2}, {1, 3}, {1, 4}, {2, 1}, {2, 3}};
  double progress_reward = 1.0;  // per column of rightward progress
  double step_penalty = 0.3;
  double goal_bonus = 5.0;
  int horizon = 40;
  double gamma = 0.99;
  double cost_limit = 0.5;
};

class GridCrawlEnv final : public Env {
 public:
  enum Action { kWalk = 0, kStride = 1, kUp = 2, kDown = 3 };
  static constexpr int kNumActions = 4;

  explicit GridCrawlEnv(GridCrawlConfig config = {});

  CmdpSpec spec() const override;
  Vec reset(uint64_t seed) override;
  StepResult step(const Vec& action) override;
  void apply_task(const TaskId& task) override;
  TaskId active_task() const override { return task_; }
  std::vector<TaskId> valid_tasks() const override;
  std::vector<uint8_t> action_mask() const override { return mask_; }

  int state_index(int row, int col) const { return row * config_.cols + col; }
  int num_states() const { return config_.rows * config_.cols; }
  bool is_hazard(int row, int col) const;
  const GridCrawlConfig& config() const { return config_; }

  /// Full tabular model of one task (used by the constrained oracle).
  TabularCmdp to_tabular(const TaskId& task) const;

  static std::vector<uint8_t> mask_for(const TaskId& task);

 private:
  Vec observe() const;
  /// (next_row, next_col) under the deterministic move rules.
  std::pair<int, int> transition(int row, int col, int action) const;

  GridCrawlConfig config_;
  TaskId task_ = TaskId::nominal();
  std::vector<uint8_t> mask_;
  int row_ = 0;
  int col_ = 0;
  int step_in_episode_ = 0;
  bool episode_open_ = false;
};

}  // namespace safecrl
