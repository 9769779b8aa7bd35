#include "safecrl/runner/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "safecrl/rollout/collect.hpp"

namespace safecrl {

namespace fs = std::filesystem;
using nlohmann::json;

const char* runlog_header() {
  return "seed,global_step,task,visit,iteration,mean_ep_reward,mean_ep_cost,"
         "mean_ep_cost_disc,cost_estimate,kl,clip_fraction,ewc_penalty,cpo_case,degraded";
}

namespace {

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

void write_runlog_row(std::ostream& out, uint64_t seed, int64_t global_step,
                      const TaskId& task, int visit, int64_t iteration,
                      const IterationDiagnostics& diag) {
  out << seed << ',' << global_step << ',' << to_string(task) << ',' << visit << ','
      << iteration << ',' << csv_num(diag.mean_episode_reward) << ','
      << csv_num(diag.mean_episode_cost) << ','
      << csv_num(diag.mean_episode_cost_discounted) << ','
      << csv_num(diag.cost_estimate) << ',' << csv_num(diag.kl) << ','
      << csv_num(diag.clip_fraction) << ',' << csv_num(diag.ewc_penalty) << ','
      << diag.cpo_case << ',' << (diag.degraded ? 1 : 0) << '\n';
}

}  // namespace

SeedRunResult run_seed(const ExperimentConfig& config, uint64_t seed,
                       std::ostream* runlog) {
  SeedRunResult result;
  result.seed = seed;
  try {
    const TaskSchedule schedule = config.make_schedule();
    const int64_t iteration_steps =
        static_cast<int64_t>(config.workers) * config.steps_per_worker;

    RolloutSet rollout(config.make_env_factory(), config.workers, seed);
    std::unique_ptr<Learner> learner = config.make_learner(seed);

    std::map<int, int> visit_counts;  // task index -> visits so far
    int64_t global_step = 0;
    int64_t iteration = 0;

    const auto& segments = schedule.segments();
    for (size_t seg_idx = 0; seg_idx < segments.size(); ++seg_idx) {
      const TaskId task = segments[seg_idx].task;
      if (seg_idx > 0)
        learner->on_task_boundary(segments[seg_idx - 1].task, static_cast<int>(seg_idx));

      rollout.apply_task(task);
      learner->on_task_start(task, rollout.env(0).action_mask());

      VisitLog visit;
      visit.task = task;
      visit.visit = ++visit_counts[task.index];

      const int64_t iters = segments[seg_idx].budget / iteration_steps;
      for (int64_t it = 0; it < iters; ++it) {
        TrajectoryBatch batch = rollout.collect(learner->policy(), learner->reward_critic(),
                                                learner->cost_critic(),
                                                config.steps_per_worker);
        const IterationDiagnostics diag = learner->update(batch);
        visit.step_cost_sum += batch.costs.sum();
        visit.step_count += batch.size();
        for (const auto& ep : batch.completed)
          visit.episode_rewards.push_back(ep.reward_sum);
        global_step += iteration_steps;
        ++iteration;
        if (runlog != nullptr)
          write_runlog_row(*runlog, seed, global_step, task, visit.visit, iteration, diag);
      }
      result.visits.push_back(std::move(visit));
    }
    result.learner = std::move(learner);
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

namespace {

void write_visit_files(const std::string& seed_dir, uint64_t seed,
                       const std::vector<VisitLog>& visits) {
  std::ofstream totals(seed_dir + "/visit_totals.csv");
  totals << "seed,task,visit,step_cost_sum,step_count,episodes,immediate,final\n";
  std::ofstream episodes(seed_dir + "/visits.csv");
  episodes << "seed,task,visit,episode,reward\n";
  for (const auto& v : visits) {
    totals << seed << ',' << to_string(v.task) << ',' << v.visit << ','
           << format_double(v.step_cost_sum) << ',' << v.step_count << ','
           << v.episode_rewards.size() << ','
           << (v.has_episodes() ? format_double(v.immediate()) : "") << ','
           << (v.has_episodes() ? format_double(v.final_reward()) : "") << '\n';
    for (size_t e = 0; e < v.episode_rewards.size(); ++e)
      episodes << seed << ',' << to_string(v.task) << ',' << v.visit << ',' << (e + 1)
               << ',' << format_double(v.episode_rewards[e]) << '\n';
  }
}

struct MetricsRow {
  uint64_t seed;
  std::string task;
  TotalCostResult cost;
  bool forget_defined = false;
  ForgetResult forget;
  FinalRewardResult final_reward;
};

std::vector<MetricsRow> compute_metrics(
    const std::map<uint64_t, std::vector<VisitLog>>& by_seed) {
  std::vector<MetricsRow> rows;
  for (const auto& [seed, visits] : by_seed) {
    std::map<int, std::vector<VisitLog>> by_task;
    for (const auto& v : visits) by_task[v.task.index].push_back(v);
    for (const auto& [tidx, tvisits] : by_task) {
      MetricsRow row;
      row.seed = seed;
      row.task = to_string(tvisits.front().task);
      row.cost = total_cost(tvisits);
      if (tvisits.size() >= 2) {
        try {
          row.forget = forget_percentage(tvisits);
          row.forget_defined = true;
        } catch (const ConfigError&) {
          row.forget_defined = false;
        }
      }
      row.final_reward = final_task_reward(tvisits);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_metrics_files(const std::string& run_dir, const std::vector<MetricsRow>& rows,
                         std::ostream& table_out) {
  std::ofstream csv(run_dir + "/metrics.csv");
  csv << "seed,task,total_cost,total_cost_empty,forget_percent,forget_pairs,"
         "forget_excluded,final_reward,final_available\n";
  for (const auto& r : rows) {
    csv << r.seed << ',' << r.task << ',' << format_double(r.cost.value) << ','
        << (r.cost.empty_series ? 1 : 0) << ','
        << (r.forget_defined ? format_double(r.forget.percent) : "") << ','
        << (r.forget_defined ? std::to_string(r.forget.pairs_used) : "") << ','
        << (r.forget_defined ? std::to_string(r.forget.pairs_excluded) : "") << ','
        << (r.final_reward.available ? format_double(r.final_reward.value) : "") << ','
        << (r.final_reward.available ? 1 : 0) << '\n';
  }

  // aggregate across seeds per (task, metric)
  std::vector<std::string> tasks;
  for (const auto& r : rows)
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end())
      tasks.push_back(r.task);

  std::ofstream agg(run_dir + "/metrics_aggregate.csv");
  agg << "task,metric,mean,std,n\n";
  std::ostringstream table;
  table << std::left << std::setw(24) << "metric";
  for (const auto& t : tasks) table << std::setw(22) << t;
  table << '\n';

  const std::vector<std::pair<std::string, int>> metric_kinds = {
      {"total_cost", 0}, {"forget_percent", 1}, {"final_reward", 2}};
  for (const auto& [name, kind] : metric_kinds) {
    table << std::setw(24) << name;
    for (const auto& t : tasks) {
      std::vector<double> vals;
      for (const auto& r : rows) {
        if (r.task != t) continue;
        if (kind == 0) vals.push_back(r.cost.value);
        if (kind == 1 && r.forget_defined) vals.push_back(r.forget.percent);
        if (kind == 2 && r.final_reward.available) vals.push_back(r.final_reward.value);
      }
      if (vals.empty()) {
        agg << t << ',' << name << ",,,0\n";
        table << std::setw(22) << "-";
        continue;
      }
      const SeedAggregate a = aggregate_seeds(vals);
      agg << t << ',' << name << ',' << format_double(a.mean) << ','
          << (a.stddev_defined ? format_double(a.stddev) : "") << ',' << vals.size()
          << '\n';
      std::ostringstream cell;
      cell << std::setprecision(4) << a.mean;
      if (a.stddev_defined) cell << " +- " << std::setprecision(3) << a.stddev;
      table << std::setw(22) << cell.str();
    }
    table << '\n';
  }
  table_out << table.str();
  std::ofstream txt(run_dir + "/metrics_table.txt");
  txt << table.str();
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);

  struct SeedSlot {
    uint64_t seed;
    std::string dir;
    bool ok = false;
    std::string error;
    std::vector<VisitLog> visits;
  };
  std::vector<SeedSlot> slots;
  for (uint64_t seed : config.seeds) {
    SeedSlot slot;
    slot.seed = seed;
    slot.dir = config.output_dir + "/seed_" + std::to_string(seed);
    fs::create_directories(slot.dir);
    slots.push_back(std::move(slot));
  }

  auto run_one = [&config](SeedSlot& slot) {
    std::ofstream runlog(slot.dir + "/runlog.csv");
    runlog << runlog_header() << '\n';
    SeedRunResult r = run_seed(config, slot.seed, &runlog);
    slot.ok = r.ok;
    slot.error = r.error;
    if (r.ok) {
      slot.visits = std::move(r.visits);
      write_visit_files(slot.dir, slot.seed, slot.visits);
    }
  };

  if (config.parallel_seeds && slots.size() > 1) {
    std::vector<std::thread> threads;
    threads.reserve(slots.size());
    for (auto& slot : slots) threads.emplace_back(run_one, std::ref(slot));
    for (auto& t : threads) t.join();
  } else {
    for (auto& slot : slots) run_one(slot);
  }

  json manifest;
  manifest["library_version"] = kLibraryVersion;
  manifest["log_schema_version"] = kLogSchemaVersion;
  manifest["config"] = config.to_json();
  manifest["config_hash"] = config.hash();
  json seed_status = json::array();
  bool all_ok = true;
  for (const auto& slot : slots) {
    seed_status.push_back({{"seed", slot.seed},
                           {"status", slot.ok ? "ok" : "failed"},
                           {"error", slot.error}});
    all_ok = all_ok && slot.ok;
  }
  manifest["seeds"] = seed_status;
  std::ofstream mf(config.output_dir + "/manifest.json");
  mf << manifest.dump(2) << '\n';

  std::map<uint64_t, std::vector<VisitLog>> by_seed;
  for (auto& slot : slots)
    if (slot.ok) by_seed[slot.seed] = std::move(slot.visits);
  if (!by_seed.empty()) {
    const auto rows = compute_metrics(by_seed);
    std::ostringstream sink;
    write_metrics_files(config.output_dir, rows, sink);
  }
  return all_ok ? 0 : 2;
}

std::map<uint64_t, std::vector<VisitLog>> load_visits(const std::string& run_dir) {
  std::map<uint64_t, std::vector<VisitLog>> by_seed;
  std::ifstream mf(run_dir + "/manifest.json");
  if (!mf) throw ConfigError("missing manifest.json in " + run_dir);
  json manifest;
  mf >> manifest;

  for (const auto& entry : manifest.at("seeds")) {
    if (entry.at("status").get<std::string>() != "ok") continue;
    const uint64_t seed = entry.at("seed").get<uint64_t>();
    const std::string seed_dir = run_dir + "/seed_" + std::to_string(seed);

    std::map<std::pair<std::string, int>, VisitLog> visits;
    std::ifstream totals(seed_dir + "/visit_totals.csv");
    if (!totals) throw ConfigError("missing visit_totals.csv for seed " +
                                   std::to_string(seed));
    std::string line;
    std::getline(totals, line);  // header
    while (std::getline(totals, line)) {
      std::istringstream ss(line);
      std::string seed_s, task_s, visit_s, cost_s, steps_s, eps_s, imm_s, fin_s;
      std::getline(ss, seed_s, ',');
      std::getline(ss, task_s, ',');
      std::getline(ss, visit_s, ',');
      std::getline(ss, cost_s, ',');
      std::getline(ss, steps_s, ',');
      std::getline(ss, eps_s, ',');
      std::getline(ss, imm_s, ',');
      std::getline(ss, fin_s, ',');
      VisitLog v;
      v.task = task_from_string(task_s);
      v.visit = std::stoi(visit_s);
      v.step_cost_sum = std::stod(cost_s);
      v.step_count = std::stoll(steps_s);
      visits[{task_s, v.visit}] = std::move(v);
    }

    std::ifstream episodes(seed_dir + "/visits.csv");
    if (!episodes) throw ConfigError("missing visits.csv for seed " + std::to_string(seed));
    std::getline(episodes, line);  // header
    while (std::getline(episodes, line)) {
      std::istringstream ss(line);
      std::string seed_s, task_s, visit_s, ep_s, reward_s;
      std::getline(ss, seed_s, ',');
      std::getline(ss, task_s, ',');
      std::getline(ss, visit_s, ',');
      std::getline(ss, ep_s, ',');
      std::getline(ss, reward_s, ',');
      visits.at({task_s, std::stoi(visit_s)})
          .episode_rewards.push_back(std::stod(reward_s));
    }

    std::vector<VisitLog> ordered;
    for (auto& [key, v] : visits) ordered.push_back(std::move(v));
    std::sort(ordered.begin(), ordered.end(), [](const VisitLog& a, const VisitLog& b) {
      return std::make_pair(a.task.index, a.visit) < std::make_pair(b.task.index, b.visit);
    });
    by_seed[seed] = std::move(ordered);
  }
  return by_seed;
}

int emit_metrics(const std::string& run_dir, std::ostream& table_out) {
  try {
    const auto by_seed = load_visits(run_dir);
    if (by_seed.empty()) {
      table_out << "no successful seeds in " << run_dir << '\n';
      return 2;
    }
    const auto rows = compute_metrics(by_seed);
    write_metrics_files(run_dir, rows, table_out);
    return 0;
  } catch (const std::exception& e) {
    table_out << "metrics failed: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace safecrl
