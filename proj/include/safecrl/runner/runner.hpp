#pragma once

#include <map>
#include <ostream>

#include "safecrl/metrics/continual.hpp"
#include "safecrl/runner/config.hpp"

namespace safecrl {

struct SeedRunResult {
  uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<VisitLog> visits;
  std::unique_ptr<Learner> learner;  // end-of-run agent (used by eval/sweep)
};

/// Runs one seed through the full schedule, invoking the task-boundary hooks
/// and streaming RunLogRow lines to `runlog` when given.
SeedRunResult run_seed(const ExperimentConfig& config, uint64_t seed,
                       std::ostream* runlog);

/// Full experiment: every seed (in parallel when configured), all artifacts
/// under config.output_dir. Returns 0 on success, 2 if any seed failed.
int run_experiment(const ExperimentConfig& config);

/// Per-seed VisitLog store reconstructed from a run directory's CSVs.
std::map<uint64_t, std::vector<VisitLog>> load_visits(const std::string& run_dir);

/// Computes the metric suite from persisted logs and writes metrics.csv,
/// metrics_aggregate.csv and an aligned plain-text table. Returns 0, or 2 on
/// missing/failed inputs.
int emit_metrics(const std::string& run_dir, std::ostream& table_out);

const char* runlog_header();

}  // namespace safecrl
