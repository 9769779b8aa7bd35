#include "safecrl/envs/oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace safecrl {

namespace lp {
namespace {
constexpr double kEps = 1e-9;
}

Result solve(const Mat& a_in, const Vec& b_in, const Vec& c) {
  const int m = static_cast<int>(a_in.rows());
  const int n = static_cast<int>(a_in.cols());
  if (b_in.size() != m || c.size() != n) throw ConfigError("lp::solve: shape mismatch");

  Mat a = a_in;
  Vec b = b_in;
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) { a.row(i) = -a.row(i); b[i] = -b[i]; }
  }

  // tableau over [original | artificial | rhs]
  const int total = n + m;
  Mat t(m + 1, total + 1);
  t.setZero();
  t.block(0, 0, m, n) = a;
  t.block(0, n, m, m) = Mat::Identity(m, m);
  t.col(total).head(m) = b;

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  auto pivot = [&](int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    basis[row] = col;
  };

  // runs the simplex on the current cost row; columns >= limit are ignored
  auto iterate = [&](int limit) -> bool {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (t(m, j) < -kEps) { enter = j; break; }  // Bland: first improving column
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t(i, enter) > kEps) {
          const double ratio = t(i, total) / t(i, enter);
          if (ratio < best - kEps ||
              (ratio < best + kEps && (leave < 0 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
  };

  // phase 1: minimize the sum of artificials
  for (int j = 0; j < total; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += t(i, j);
    t(m, j) = (j >= n ? 1.0 : 0.0) - s;
  }
  double rhs_sum = 0.0;
  for (int i = 0; i < m; ++i) rhs_sum += t(i, total);
  t(m, total) = -rhs_sum;

  if (!iterate(total)) throw NumericError("lp::solve: phase-1 unbounded");
  if (-t(m, total) > 1e-7 * (1.0 + b.cwiseAbs().maxCoeff())) {
    Result r;
    r.status = Status::kInfeasible;
    return r;
  }

  // drive leftover artificials out of the basis
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j)
      if (std::abs(t(i, j)) > kEps) { col = j; break; }
    if (col >= 0) pivot(i, col);
    // otherwise the row is redundant; the artificial stays basic at zero
  }

  // phase 2 cost row: reduced costs of c over the current basis
  t.row(m).setZero();
  for (int j = 0; j < n; ++j) t(m, j) = c[j];
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n && c[basis[i]] != 0.0) t.row(m) -= c[basis[i]] * t.row(i);
  }
  for (int j = n; j < total; ++j) t(m, j) = 0.0;  // artificials may not re-enter

  if (!iterate(n)) {
    Result r;
    r.status = Status::kUnbounded;
    return r;
  }

  Result r;
  r.status = Status::kOptimal;
  r.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) r.x[basis[i]] = t(i, total);
  r.objective = c.dot(r.x);
  return r;
}

}  // namespace lp

namespace {

struct VarIndex {
  std::vector<int> offset;  // state -> first variable index
  std::vector<std::vector<int>> actions;  // state -> valid action list
  int count = 0;
};

VarIndex index_variables(const TabularCmdp& model) {
  VarIndex idx;
  idx.offset.resize(model.n_states, -1);
  idx.actions.resize(model.n_states);
  for (int s = 0; s < model.n_states; ++s) {
    idx.offset[s] = idx.count;
    for (int a = 0; a < model.n_actions; ++a)
      if (model.action_valid[a]) idx.actions[s].push_back(a);
    idx.count += static_cast<int>(idx.actions[s].size());
  }
  return idx;
}

/// Builds the occupancy flow system: for every state,
/// sum_a mu(s,a) - gamma * inflow(s) = [s == start].
void build_flow(const TabularCmdp& model, const VarIndex& idx, Mat& a, Vec& b) {
  a = Mat::Zero(model.n_states, idx.count);
  b = Vec::Zero(model.n_states);
  b[model.start_state] = 1.0;
  for (int s = 0; s < model.n_states; ++s) {
    int k = idx.offset[s];
    for (int ai : idx.actions[s]) {
      a(s, k) += 1.0;
      const int nxt = model.next(s, ai);
      if (nxt >= 0) a(nxt, k) -= model.gamma;
      ++k;
    }
  }
}

double occupancy_dot(const TabularCmdp& model, const VarIndex& idx, const Mat& table,
                     const Vec& mu) {
  double acc = 0.0;
  for (int s = 0; s < model.n_states; ++s) {
    int k = idx.offset[s];
    for (int ai : idx.actions[s]) acc += mu[k++] * table(s, ai);
  }
  return acc;
}

Mat extract_policy(const TabularCmdp& model, const VarIndex& idx, const Vec& mu) {
  Mat policy = Mat::Zero(model.n_states, model.n_actions);
  for (int s = 0; s < model.n_states; ++s) {
    int k = idx.offset[s];
    double total = 0.0;
    for (size_t j = 0; j < idx.actions[s].size(); ++j) total += mu[k + j];
    if (total > 1e-12) {
      for (size_t j = 0; j < idx.actions[s].size(); ++j)
        policy(s, idx.actions[s][j]) = mu[k + j] / total;
    } else if (!idx.actions[s].empty()) {
      for (int ai : idx.actions[s])
        policy(s, ai) = 1.0 / static_cast<double>(idx.actions[s].size());
    }
  }
  return policy;
}

}  // namespace

OracleResult solve_constrained_tabular(const TabularCmdp& model, double cost_limit) {
  if (model.gamma < 0.0 || model.gamma >= 1.0)
    throw ConfigError("solve_constrained_tabular: gamma must lie in [0,1)");
  if (model.n_states > 200)
    throw ConfigError("solve_constrained_tabular: instance too large for exact solution");

  const VarIndex idx = index_variables(model);
  Mat flow;
  Vec rhs;
  build_flow(model, idx, flow, rhs);

  const bool constrained = std::isfinite(cost_limit);
  const int n_mu = idx.count;
  const int n_vars = n_mu + (constrained ? 1 : 0);  // slack on the cost row
  const int n_rows = model.n_states + (constrained ? 1 : 0);

  Mat a = Mat::Zero(n_rows, n_vars);
  Vec b = Vec::Zero(n_rows);
  a.block(0, 0, model.n_states, n_mu) = flow;
  b.head(model.n_states) = rhs;

  Vec reward_coef = Vec::Zero(n_vars);
  Vec cost_coef = Vec::Zero(n_vars);
  for (int s = 0; s < model.n_states; ++s) {
    int k = idx.offset[s];
    for (int ai : idx.actions[s]) {
      reward_coef[k] = model.reward(s, ai);
      cost_coef[k] = model.cost(s, ai);
      ++k;
    }
  }
  if (constrained) {
    a.row(model.n_states).head(n_mu) = cost_coef.head(n_mu).transpose();
    a(model.n_states, n_mu) = 1.0;  // slack
    b[model.n_states] = cost_limit;
  }

  OracleResult out;
  const lp::Result solved = lp::solve(a, b, -reward_coef);
  if (solved.status == lp::Status::kOptimal) {
    out.feasible = true;
    out.value = -solved.objective;
    out.expected_cost = occupancy_dot(model, idx, model.cost, solved.x.head(n_mu));
    out.policy = extract_policy(model, idx, solved.x.head(n_mu));
    out.min_expected_cost = out.expected_cost;
    return out;
  }
  if (solved.status == lp::Status::kUnbounded)
    throw NumericError("solve_constrained_tabular: unbounded occupancy program");

  // infeasible: report the least achievable expected cost
  Mat a0 = a.leftCols(n_mu).topRows(model.n_states);
  const lp::Result min_cost = lp::solve(a0, rhs, cost_coef.head(n_mu));
  out.feasible = false;
  if (min_cost.status == lp::Status::kOptimal) {
    out.min_expected_cost = min_cost.objective;
    out.policy = extract_policy(model, idx, min_cost.x);
  }
  return out;
}

OracleResult solve_gridcrawl_oracle(const GridCrawlEnv& env, const TaskId& task,
                                    double cost_limit) {
  return solve_constrained_tabular(env.to_tabular(task), cost_limit);
}

}  // namespace safecrl
