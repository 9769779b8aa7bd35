#pragma once

#include "safecrl/envs/gridcrawl.hpp"

namespace safecrl {

namespace lp {

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Result {
  Status status = Status::kInfeasible;
  Vec x;
  double objective = 0.0;
};

/// Minimizes c'x subject to Ax = b, x >= 0 with a dense two-phase tableau
/// simplex (Bland's rule, so it cannot cycle).
Result solve(const Mat& a, const Vec& b, const Vec& c);

}  // namespace lp

/// Exact solution of the constrained tabular program: the best expected
/// discounted return from the start state over randomized stationary
/// policies whose expected discounted cost stays within the limit. Solved
/// as a linear program over discounted occupancy measures.
struct OracleResult {
  bool feasible = false;
  double value = 0.0;
  double expected_cost = 0.0;      // discounted cost of the optimum
  double min_expected_cost = 0.0;  // least achievable cost (reported when infeasible)
  Mat policy;                      // n_states x n_actions, rows sum to 1 over valid actions
};

OracleResult solve_constrained_tabular(const TabularCmdp& model, double cost_limit);

/// Constrained optimum of one GridCrawl task at the given episodic limit.
OracleResult solve_gridcrawl_oracle(const GridCrawlEnv& env, const TaskId& task,
                                    double cost_limit);

}  // namespace safecrl
