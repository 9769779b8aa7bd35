#include "safecrl/metrics/continual.hpp"

#include <algorithm>
#include <cmath>

namespace safecrl {

namespace {
constexpr double kZeroFinal = 1e-9;

std::vector<VisitLog> sorted_by_visit(std::vector<VisitLog> visits) {
  std::sort(visits.begin(), visits.end(),
            [](const VisitLog& a, const VisitLog& b) { return a.visit < b.visit; });
  return visits;
}
}  // namespace

double VisitLog::immediate() const {
  if (episode_rewards.empty()) throw ConfigError("VisitLog: no completed episodes");
  return episode_rewards.front();
}

double VisitLog::final_reward() const {
  if (episode_rewards.empty()) throw ConfigError("VisitLog: no completed episodes");
  return episode_rewards.back();
}

TotalCostResult total_cost(const std::vector<VisitLog>& visits) {
  if (visits.empty()) throw ConfigError("total_cost: needs at least one visit");
  TotalCostResult out;
  int64_t steps = 0;
  for (const auto& v : visits) {
    out.value += v.step_cost_sum;
    steps += v.step_count;
  }
  out.value /= static_cast<double>(visits.size());
  out.empty_series = (steps == 0);
  if (out.empty_series) out.value = 0.0;
  return out;
}

ForgetResult forget_percentage(const std::vector<VisitLog>& visits) {
  if (visits.size() < 2)
    throw ConfigError("forget_percentage: needs at least two visits of the task");
  const std::vector<VisitLog> ordered = sorted_by_visit(visits);
  ForgetResult out;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < ordered.size(); ++i) {
    if (!ordered[i].has_episodes() || !ordered[i + 1].has_episodes()) {
      ++out.pairs_excluded;
      continue;
    }
    const double final_prev = ordered[i].final_reward();
    const double immediate_next = ordered[i + 1].immediate();
    if (std::abs(final_prev) < kZeroFinal) {
      ++out.pairs_excluded;
      continue;
    }
    acc += (final_prev - immediate_next) / std::abs(final_prev);
    ++out.pairs_used;
  }
  if (out.pairs_used == 0)
    throw ConfigError("forget_percentage: every revisit pair was excluded");
  out.percent = 100.0 * acc / static_cast<double>(out.pairs_used);
  return out;
}

FinalRewardResult final_task_reward(const std::vector<VisitLog>& visits) {
  if (visits.empty()) throw ConfigError("final_task_reward: needs at least one visit");
  const std::vector<VisitLog> ordered = sorted_by_visit(visits);
  FinalRewardResult out;
  if (!ordered.back().has_episodes()) return out;  // flagged missing
  out.available = true;
  out.value = ordered.back().final_reward();
  return out;
}

SeedAggregate aggregate_seeds(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("aggregate_seeds: no values");
  SeedAggregate out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return out;  // std reported as absent
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  out.stddev_defined = true;
  return out;
}

}  // namespace safecrl
