#include "safecrl/envs/gridcrawl.hpp"

#include <algorithm>
#include <cmath>

namespace safecrl {

GridCrawlEnv::GridCrawlEnv(GridCrawlConfig config) : config_(std::move(config)) {
  if (config_.rows < 1 || config_.cols < 2)
    throw ConfigError("GridCrawlEnv: grid must have at least 1 row and 2 columns");
  if (config_.start_col >= config_.cols - 1)
    throw ConfigError("GridCrawlEnv: start column must lie before the goal column");
  for (auto [r, c] : config_.hazards)
    if (r < 0 || r >= config_.rows || c < 0 || c >= config_.cols)
      throw ConfigError("GridCrawlEnv: hazard outside the grid");
  mask_ = mask_for(task_);
}

std::vector<uint8_t> GridCrawlEnv::mask_for(const TaskId& task) {
  switch (task.label) {
    case TaskLabel::kNominal: return {1, 1, 1, 1};
    case TaskLabel::kBack: return {1, 0, 1, 1};     // stride needs the rear pair
    case TaskLabel::kFront: return {1, 0, 0, 1};    // no stride, no climbing up
  }
  throw ConfigError("GridCrawlEnv: unknown task");
}

CmdpSpec GridCrawlEnv::spec() const {
  CmdpSpec s;
  s.obs_dim = num_states();
  s.act_dim = 1;
  s.num_actions = kNumActions;
  s.gamma = config_.gamma;
  s.cost_limit = config_.cost_limit;
  s.horizon = config_.horizon;
  return s;
}

std::vector<TaskId> GridCrawlEnv::valid_tasks() const {
  return {TaskId::nominal(), TaskId::back(), TaskId::front()};
}

void GridCrawlEnv::apply_task(const TaskId& task) {
  bool known = false;
  for (const auto& t : valid_tasks()) known = known || (t == task);
  if (!known) throw ConfigError("GridCrawlEnv: unknown task " + to_string(task));
  task_ = task;
  mask_ = mask_for(task);
}

bool GridCrawlEnv::is_hazard(int row, int col) const {
  return std::find(config_.hazards.begin(), config_.hazards.end(),
                   std::make_pair(row, col)) != config_.hazards.end();
}

Vec GridCrawlEnv::observe() const {
  Vec obs = Vec::Zero(num_states());
  obs[state_index(row_, col_)] = 1.0;
  return obs;
}

Vec GridCrawlEnv::reset(uint64_t /*seed*/) {
  row_ = config_.start_row;
  col_ = config_.start_col;
  step_in_episode_ = 0;
  episode_open_ = true;
  return observe();
}

std::pair<int, int> GridCrawlEnv::transition(int row, int col, int action) const {
  int r = row, c = col;
  switch (action) {
    case kWalk: c = std::min(c + 1, config_.cols - 1); break;
    case kStride: c = std::min(c + 2, config_.cols - 1); break;
    case kUp: r = std::max(r - 1, 0); break;
    case kDown: r = std::min(r + 1, config_.rows - 1); break;
    default: throw ConfigError("GridCrawlEnv: action index out of range");
  }
  return {r, c};
}

StepResult GridCrawlEnv::step(const Vec& action) {
  if (!episode_open_) throw ConfigError("GridCrawlEnv::step: episode not open; call reset");
  if (action.size() != 1) throw ConfigError("GridCrawlEnv::step: expected one action index");
  const int a = static_cast<int>(std::lround(action[0]));
  if (a < 0 || a >= kNumActions)
    throw ConfigError("GridCrawlEnv::step: action index out of range");
  if (!mask_[a])
    throw ConfigError("GridCrawlEnv::step: action removed by the active task");

  const int old_col = col_;
  auto [r, c] = transition(row_, col_, a);
  row_ = r;
  col_ = c;
  ++step_in_episode_;

  StepResult out;
  const bool reached_goal = (col_ == config_.cols - 1);
  out.reward = config_.progress_reward * (col_ - old_col) - config_.step_penalty +
               (reached_goal ? config_.goal_bonus : 0.0);
  out.cost = is_hazard(row_, col_) ? 1.0 : 0.0;
  out.terminated = reached_goal;
  out.truncated = !reached_goal && (step_in_episode_ >= config_.horizon);
  out.next_obs = observe();
  if (out.terminated || out.truncated) episode_open_ = false;
  return out;
}

TabularCmdp GridCrawlEnv::to_tabular(const TaskId& task) const {
  TabularCmdp model;
  model.n_states = num_states();
  model.n_actions = kNumActions;
  model.action_valid = mask_for(task);
  model.next = Eigen::MatrixXi::Constant(model.n_states, model.n_actions, -1);
  model.reward = Mat::Zero(model.n_states, model.n_actions);
  model.cost = Mat::Zero(model.n_states, model.n_actions);
  model.start_state = state_index(config_.start_row, config_.start_col);
  model.gamma = config_.gamma;

  for (int row = 0; row < config_.rows; ++row) {
    for (int col = 0; col < config_.cols; ++col) {
      const int s = state_index(row, col);
      if (col == config_.cols - 1) continue;  // goal column is absorbing
      for (int a = 0; a < kNumActions; ++a) {
        if (!model.action_valid[a]) continue;
        auto [r2, c2] = transition(row, col, a);
        const bool reached_goal = (c2 == config_.cols - 1);
        model.next(s, a) = reached_goal ? -1 : state_index(r2, c2);
        model.reward(s, a) = config_.progress_reward * (c2 - col) - config_.step_penalty +
                             (reached_goal ? config_.goal_bonus : 0.0);
        model.cost(s, a) = is_hazard(r2, c2) ? 1.0 : 0.0;
      }
    }
  }
  return model;
}

}  // namespace safecrl
