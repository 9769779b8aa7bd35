#include "safecrl/envs/task.hpp"

#include <algorithm>

namespace safecrl {

std::string to_string(const TaskId& task) {
  switch (task.label) {
    case TaskLabel::kNominal: return "nominal";
    case TaskLabel::kBack: return "back";
    case TaskLabel::kFront: return "front";
  }
  return "unknown";
}

TaskId task_from_string(const std::string& name) {
  if (name == "nominal") return TaskId::nominal();
  if (name == "back") return TaskId::back();
  if (name == "front") return TaskId::front();
  throw ConfigError("unknown task label: " + name);
}

TaskSchedule::TaskSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ConfigError("TaskSchedule: empty schedule");
  for (const auto& seg : segments_) {
    if (seg.budget <= 0) throw ConfigError("TaskSchedule: segment budgets must be positive");
    total_ += seg.budget;
  }
}

TaskSchedule::Position TaskSchedule::at(int64_t global_step) const {
  if (global_step < 0) throw ConfigError("TaskSchedule::at: negative step");
  Position pos;
  if (global_step >= total_) {
    pos.complete = true;
    pos.segment = static_cast<int>(segments_.size());
    return pos;
  }
  int64_t start = 0;
  for (size_t i = 0; i < segments_.size(); ++i) {
    if (global_step < start + segments_[i].budget) {
      pos.task = segments_[i].task;
      pos.segment = static_cast<int>(i);
      pos.boundary = (global_step == start);
      return pos;
    }
    start += segments_[i].budget;
  }
  pos.complete = true;  // unreachable
  return pos;
}

std::vector<TaskId> TaskSchedule::distinct_tasks() const {
  std::vector<TaskId> out;
  for (const auto& seg : segments_)
    if (std::find(out.begin(), out.end(), seg.task) == out.end()) out.push_back(seg.task);
  return out;
}

}  // namespace safecrl
