#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "safecrl/common.hpp"

namespace safecrl {

/// One stationary operating regime of the non-stationary constrained MDP.
enum class TaskLabel { kNominal = 0, kBack = 1, kFront = 2 };

struct TaskId {
  TaskLabel label = TaskLabel::kNominal;
  int index = 0;

  static TaskId nominal() { return {TaskLabel::kNominal, 0}; }
  static TaskId back() { return {TaskLabel::kBack, 1}; }
  static TaskId front() { return {TaskLabel::kFront, 2}; }

  bool operator==(const TaskId& o) const { return label == o.label && index == o.index; }
  bool operator!=(const TaskId& o) const { return !(*this == o); }
  bool operator<(const TaskId& o) const { return index < o.index; }
};

std::string to_string(const TaskId& task);
TaskId task_from_string(const std::string& name);

/// Static description of one task's constrained MDP.
struct CmdpSpec {
  int obs_dim = 0;
  int act_dim = 0;       // action vector length (continuous) or 1 (discrete)
  int num_actions = 0;   // 0 for continuous action spaces
  double gamma = 0.99;
  double cost_limit = 25.0;  // per-episode allowed violation budget d
  int horizon = 200;

  bool discrete() const { return num_actions > 0; }
};

struct StepResult {
  Vec next_obs;
  double reward = 0.0;
  double cost = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// Ordered (task, step budget) segments defining the schedule's
/// time-dependence over one experiment.
class TaskSchedule {
 public:
  struct Segment {
    TaskId task;
    int64_t budget = 0;
  };
  struct Position {
    TaskId task;
    int segment = 0;
    bool boundary = false;  // true exactly on the first step of a segment
    bool complete = false;  // step fell beyond the total budget
  };

  TaskSchedule() = default;
  explicit TaskSchedule(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  int64_t total_budget() const { return total_; }
  Position at(int64_t global_step) const;

  /// Distinct tasks in first-appearance order.
  std::vector<TaskId> distinct_tasks() const;

 private:
  std::vector<Segment> segments_;
  int64_t total_ = 0;
};

/// Abstract non-stationary constrained environment. One instance is owned by
/// exactly one rollout worker; instances never share state.
class Env {
 public:
  virtual ~Env() = default;
  virtual CmdpSpec spec() const = 0;
  virtual Vec reset(uint64_t seed) = 0;
  virtual StepResult step(const Vec& action) = 0;
  /// Swaps the active dynamics without touching episode state.
  virtual void apply_task(const TaskId& task) = 0;
  virtual TaskId active_task() const = 0;
  virtual std::vector<TaskId> valid_tasks() const = 0;
  /// Per-action validity under the active task (discrete envs; empty
  /// otherwise).
  virtual std::vector<uint8_t> action_mask() const { return {}; }
  /// Number of action components clipped to bounds so far (continuous envs).
  virtual int64_t clip_count() const { return 0; }
};

using EnvFactory = std::function<std::unique_ptr<Env>()>;

}  // namespace safecrl
