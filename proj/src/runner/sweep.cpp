#include "safecrl/runner/sweep.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

#include "safecrl/rollout/collect.hpp"
#include "safecrl/runner/runner.hpp"

namespace safecrl {

std::vector<LambdaSweepRow> lambda_sweep(const ExperimentConfig& base,
                                         const std::vector<double>& grid,
                                         std::ostream& out) {
  const TaskSchedule schedule = base.make_schedule();
  if (schedule.segments().size() != 2)
    throw ConfigError("lambda_sweep expects a two-task schedule");
  const TaskId first = schedule.segments()[0].task;
  const TaskId second = schedule.segments()[1].task;
  if (grid.empty()) throw ConfigError("lambda_sweep: empty grid");

  std::vector<double> unique;
  for (double lam : grid) {
    if (lam < 0.0) throw ConfigError("lambda_sweep: lambda must be non-negative");
    bool dup = false;
    for (double u : unique) dup = dup || (u == lam);
    if (dup) {
      out << "warning: duplicate lambda " << lam << " dropped from the grid\n";
      continue;
    }
    unique.push_back(lam);
  }

  const uint64_t seed = base.seeds.front();
  std::vector<LambdaSweepRow> rows;
  for (double lam : unique) {
    ExperimentConfig cfg = base;
    cfg.algorithm = "ppo_ewc";
    cfg.ewc.lambda = lam;
    cfg.shaping.enabled = false;
    cfg.seeds = {seed};
    cfg.validate();

    SeedRunResult r = run_seed(cfg, seed, nullptr);
    if (!r.ok) throw NumericError("lambda_sweep: seed run failed: " + r.error);

    LambdaSweepRow row;
    row.lambda = lam;
    const EnvFactory factory = cfg.make_env_factory();
    const EvalStats on_first =
        evaluate_policy(factory, r.learner->policy(), first, cfg.eval_episodes, seed);
    const EvalStats on_second =
        evaluate_policy(factory, r.learner->policy(), second, cfg.eval_episodes, seed);
    row.reward_first = on_first.mean_reward;
    row.cost_first = on_first.mean_cost;
    row.reward_second = on_second.mean_reward;
    row.cost_second = on_second.mean_cost;
    rows.push_back(row);
  }

  std::filesystem::create_directories(base.output_dir);
  std::ofstream csv(base.output_dir + "/sweep_lambda.csv");
  csv << "lambda,reward_" << to_string(first) << ",cost_" << to_string(first)
      << ",reward_" << to_string(second) << ",cost_" << to_string(second) << '\n';
  for (const auto& row : rows)
    csv << format_double(row.lambda) << ',' << format_double(row.reward_first) << ','
        << format_double(row.cost_first) << ',' << format_double(row.reward_second) << ','
        << format_double(row.cost_second) << '\n';

  out << std::left << std::setw(10) << "lambda" << std::setw(16)
      << ("reward_" + to_string(first)) << std::setw(16) << ("cost_" + to_string(first))
      << std::setw(16) << ("reward_" + to_string(second)) << std::setw(16)
      << ("cost_" + to_string(second)) << '\n';
  for (const auto& row : rows)
    out << std::setw(10) << row.lambda << std::setw(16) << row.reward_first
        << std::setw(16) << row.cost_first << std::setw(16) << row.reward_second
        << std::setw(16) << row.cost_second << '\n';
  return rows;
}

}  // namespace safecrl
