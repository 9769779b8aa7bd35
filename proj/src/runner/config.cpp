#include "safecrl/runner/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace safecrl {

using nlohmann::json;

namespace {

std::vector<TaskSchedule::Segment> default_schedule(const std::string& environment) {
  // nominal most frequent, every task revisited, nominal again at the end
  const int64_t budget = (environment == "pointvel") ? 200000 : 50000;
  std::vector<TaskSchedule::Segment> segs;
  for (const char* name : {"nominal", "back", "nominal", "front",
                           "nominal", "back", "front", "nominal"})
    segs.push_back({task_from_string(name), budget});
  return segs;
}

void parse_ppo(const json& j, PpoConfig& c) {
  c.clip_eps = j.value("clip_eps", c.clip_eps);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatch = j.value("minibatch", c.minibatch);
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  c.gamma = j.value("gamma", c.gamma);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
}

void parse_cpo(const json& j, CpoConfig& c) {
  c.delta = j.value("delta", c.delta);
  c.cg_iters = j.value("cg_iters", c.cg_iters);
  c.cg_tol = j.value("cg_tol", c.cg_tol);
  c.damping = j.value("damping", c.damping);
  c.backtrack_coef = j.value("backtrack_coef", c.backtrack_coef);
  c.backtrack_steps = j.value("backtrack_steps", c.backtrack_steps);
  if (j.contains("cost_limit")) c.cost_limit = j.at("cost_limit").get<double>();
  c.gamma = j.value("gamma", c.gamma);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.critic_epochs = j.value("critic_epochs", c.critic_epochs);
  c.critic_minibatch = j.value("critic_minibatch", c.critic_minibatch);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
}

void parse_pointvel(const json& j, PointVelConfig& c) {
  c.dt = j.value("dt", c.dt);
  c.drag = j.value("drag", c.drag);
  c.v_max = j.value("v_max", c.v_max);
  c.alpha_ctrl = j.value("alpha_ctrl", c.alpha_ctrl);
  c.reset_noise = j.value("reset_noise", c.reset_noise);
  c.action_bound = j.value("action_bound", c.action_bound);
  c.horizon = j.value("horizon", c.horizon);
  c.gamma = j.value("gamma", c.gamma);
  c.cost_limit = j.value("cost_limit", c.cost_limit);
}

void parse_gridcrawl(const json& j, GridCrawlConfig& c) {
  c.rows = j.value("rows", c.rows);
  c.cols = j.value("cols", c.cols);
  c.start_row = j.value("start_row", c.start_row);
  c.start_col = j.value("start_col", c.start_col);
  if (j.contains("hazards")) {
    c.hazards.clear();
    for (const auto& cell : j.at("hazards"))
      c.hazards.emplace_back(cell.at(0).get<int>(), cell.at(1).get<int>());
  }
  c.progress_reward = j.value("progress_reward", c.progress_reward);
  c.step_penalty = j.value("step_penalty", c.step_penalty);
  c.goal_bonus = j.value("goal_bonus", c.goal_bonus);
  c.horizon = j.value("horizon", c.horizon);
  c.gamma = j.value("gamma", c.gamma);
  c.cost_limit = j.value("cost_limit", c.cost_limit);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.algorithm = j.value("algorithm", c.algorithm);
  c.environment = j.value("environment", c.environment);
  if (j.contains("seeds")) {
    c.seeds.clear();
    for (const auto& s : j.at("seeds")) c.seeds.push_back(s.get<uint64_t>());
  }
  c.workers = j.value("workers", c.workers);
  c.steps_per_worker = j.value("steps_per_worker", c.steps_per_worker);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  if (j.contains("hidden")) {
    c.hidden.clear();
    for (const auto& h : j.at("hidden")) c.hidden.push_back(h.get<int>());
  }
  c.log_std_init = j.value("log_std_init", c.log_std_init);
  c.parallel_seeds = j.value("parallel_seeds", c.parallel_seeds);

  if (j.contains("ppo")) parse_ppo(j.at("ppo"), c.ppo);
  if (j.contains("ewc")) {
    c.ewc.lambda = j.at("ewc").value("lambda", c.ewc.lambda);
    c.ewc.fisher_window = j.at("ewc").value("fisher_window", c.ewc.fisher_window);
  }
  if (j.contains("shaping")) {
    c.shaping.beta = j.at("shaping").value("beta", c.shaping.beta);
    if (j.at("shaping").contains("enabled"))
      c.shaping.enabled = j.at("shaping").at("enabled").get<bool>();
  }
  if (j.contains("pointvel")) parse_pointvel(j.at("pointvel"), c.pointvel);
  if (j.contains("gridcrawl")) parse_gridcrawl(j.at("gridcrawl"), c.gridcrawl);

  // top-level overrides shared by the environment and both learner families
  if (j.contains("gamma")) {
    const double g = j.at("gamma").get<double>();
    c.ppo.gamma = c.cpo.gamma = c.pointvel.gamma = c.gridcrawl.gamma = g;
  }
  if (j.contains("cost_limit")) {
    const double d = j.at("cost_limit").get<double>();
    c.pointvel.cost_limit = c.gridcrawl.cost_limit = d;
  }
  // CPO's d follows the environment unless set explicitly
  c.cpo.cost_limit =
      (c.environment == "pointvel") ? c.pointvel.cost_limit : c.gridcrawl.cost_limit;
  if (j.contains("cpo")) parse_cpo(j.at("cpo"), c.cpo);

  if (j.contains("schedule")) {
    for (const auto& seg : j.at("schedule"))
      c.schedule.push_back({task_from_string(seg.at("task").get<std::string>()),
                            seg.at("budget").get<int64_t>()});
  }

  // algorithm implies the consolidation/shaping switches; an explicit
  // contradiction in the file is a configuration error
  if (c.algorithm == "safe_ewc") {
    if (j.contains("shaping") && j.at("shaping").contains("enabled") && !c.shaping.enabled)
      throw ConfigError("safe_ewc requires shaping.enabled = true");
    c.shaping.enabled = true;
  } else {
    if (j.contains("shaping") && j.at("shaping").contains("enabled") && c.shaping.enabled)
      throw ConfigError("algorithm '" + c.algorithm + "' runs with shaping disabled");
    c.shaping.enabled = false;
  }
  if (c.algorithm == "ppo") {
    if (j.contains("ewc") && j.at("ewc").contains("lambda") && c.ewc.lambda != 0.0)
      throw ConfigError("algorithm 'ppo' requires ewc.lambda = 0");
    c.ewc.lambda = 0.0;
  }

  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["algorithm"] = algorithm;
  j["environment"] = environment;
  j["seeds"] = seeds;
  j["workers"] = workers;
  j["steps_per_worker"] = steps_per_worker;
  j["output_dir"] = output_dir;
  j["eval_episodes"] = eval_episodes;
  j["hidden"] = hidden;
  j["log_std_init"] = log_std_init;
  j["parallel_seeds"] = parallel_seeds;
  j["ppo"] = {{"clip_eps", ppo.clip_eps}, {"epochs", ppo.epochs},
              {"minibatch", ppo.minibatch}, {"actor_lr", ppo.actor_lr},
              {"critic_lr", ppo.critic_lr}, {"gamma", ppo.gamma},
              {"gae_lambda", ppo.gae_lambda}};
  j["ewc"] = {{"lambda", ewc.lambda}, {"fisher_window", ewc.fisher_window}};
  j["shaping"] = {{"beta", shaping.beta}, {"enabled", shaping.enabled}};
  j["cpo"] = {{"delta", cpo.delta}, {"cg_iters", cpo.cg_iters}, {"cg_tol", cpo.cg_tol},
              {"damping", cpo.damping}, {"backtrack_coef", cpo.backtrack_coef},
              {"backtrack_steps", cpo.backtrack_steps}, {"cost_limit", cpo.cost_limit},
              {"gamma", cpo.gamma}, {"gae_lambda", cpo.gae_lambda},
              {"critic_epochs", cpo.critic_epochs},
              {"critic_minibatch", cpo.critic_minibatch}, {"critic_lr", cpo.critic_lr}};
  j["pointvel"] = {{"dt", pointvel.dt}, {"drag", pointvel.drag}, {"v_max", pointvel.v_max},
                   {"alpha_ctrl", pointvel.alpha_ctrl},
                   {"reset_noise", pointvel.reset_noise},
                   {"action_bound", pointvel.action_bound}, {"horizon", pointvel.horizon},
                   {"gamma", pointvel.gamma}, {"cost_limit", pointvel.cost_limit}};
  json hazards = json::array();
  for (auto [r, cc] : gridcrawl.hazards) hazards.push_back({r, cc});
  j["gridcrawl"] = {{"rows", gridcrawl.rows}, {"cols", gridcrawl.cols},
                    {"start_row", gridcrawl.start_row}, {"start_col", gridcrawl.start_col},
                    {"hazards", hazards},
                    {"progress_reward", gridcrawl.progress_reward},
                    {"step_penalty", gridcrawl.step_penalty},
                    {"goal_bonus", gridcrawl.goal_bonus}, {"horizon", gridcrawl.horizon},
                    {"gamma", gridcrawl.gamma}, {"cost_limit", gridcrawl.cost_limit}};
  json sched = json::array();
  for (const auto& seg : make_schedule().segments())
    sched.push_back({{"task", to_string(seg.task)}, {"budget", seg.budget}});
  j["schedule"] = sched;
  return j;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kAlgorithms = {"ppo", "ppo_ewc", "safe_ewc", "cpo"};
  static const std::set<std::string> kEnvironments = {"gridcrawl", "pointvel"};
  if (!kAlgorithms.count(algorithm)) throw ConfigError("unknown algorithm: " + algorithm);
  if (!kEnvironments.count(environment))
    throw ConfigError("unknown environment: " + environment);
  if (seeds.empty()) throw ConfigError("config needs at least one seed");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (steps_per_worker < 1) throw ConfigError("steps_per_worker must be >= 1");
  if (algorithm == "safe_ewc" && !shaping.enabled)
    throw ConfigError("safe_ewc requires shaping enabled");
  if (algorithm != "safe_ewc" && shaping.enabled)
    throw ConfigError("shaping is only enabled for safe_ewc");
  if (algorithm == "ppo" && ewc.lambda != 0.0)
    throw ConfigError("plain ppo requires ewc.lambda = 0");

  const TaskSchedule sched = make_schedule();
  const int64_t iteration_steps =
      static_cast<int64_t>(workers) * static_cast<int64_t>(steps_per_worker);
  for (const auto& seg : sched.segments()) {
    if (seg.budget % iteration_steps != 0)
      throw ConfigError("segment budget " + std::to_string(seg.budget) +
                        " is not divisible by workers*steps_per_worker = " +
                        std::to_string(iteration_steps));
  }
  const auto env = make_env_factory()();
  const auto valid = env->valid_tasks();
  for (const auto& seg : sched.segments()) {
    bool ok = false;
    for (const auto& t : valid) ok = ok || (t == seg.task);
    if (!ok)
      throw ConfigError("task " + to_string(seg.task) + " is not valid for " + environment);
  }
}

EnvFactory ExperimentConfig::make_env_factory() const {
  if (environment == "pointvel") {
    const PointVelConfig pc = pointvel;
    return [pc]() -> std::unique_ptr<Env> { return std::make_unique<PointVelEnv>(pc); };
  }
  const GridCrawlConfig gc = gridcrawl;
  return [gc]() -> std::unique_ptr<Env> { return std::make_unique<GridCrawlEnv>(gc); };
}

CmdpSpec ExperimentConfig::env_spec() const { return make_env_factory()()->spec(); }

double ExperimentConfig::cost_limit() const {
  return environment == "pointvel" ? pointvel.cost_limit : gridcrawl.cost_limit;
}

TaskSchedule ExperimentConfig::make_schedule() const {
  return TaskSchedule(schedule.empty() ? default_schedule(environment) : schedule);
}

EwcConfig ExperimentConfig::effective_ewc() const {
  EwcConfig e = ewc;
  if (algorithm == "ppo" || algorithm == "cpo") e.lambda = 0.0;
  return e;
}

ShapingConfig ExperimentConfig::effective_shaping() const {
  ShapingConfig s = shaping;
  s.enabled = (algorithm == "safe_ewc");
  return s;
}

std::unique_ptr<Learner> ExperimentConfig::make_learner(uint64_t seed) const {
  const CmdpSpec spec = env_spec();
  std::unique_ptr<Policy> policy;
  Rng policy_rng = make_stream(seed, 0xA1);
  if (spec.discrete()) {
    auto p = std::make_unique<CategoricalPolicy>(spec.obs_dim, spec.num_actions, hidden);
    p->init_random(policy_rng);
    policy = std::move(p);
  } else {
    auto p = std::make_unique<DiagGaussianPolicy>(spec.obs_dim, spec.act_dim, hidden,
                                                  log_std_init);
    p->init_random(policy_rng);
    policy = std::move(p);
  }
  ValueNet reward_critic(spec.obs_dim, hidden);
  Rng rc_rng = make_stream(seed, 0xA2);
  reward_critic.init_random(rc_rng);

  if (algorithm == "cpo") {
    ValueNet cost_critic(spec.obs_dim, hidden);
    Rng cc_rng = make_stream(seed, 0xA3);
    cost_critic.init_random(cc_rng);
    CpoConfig cc = cpo;
    return std::make_unique<CpoLearner>(std::move(policy), std::move(reward_critic),
                                        std::move(cost_critic), cc, seed);
  }
  return std::make_unique<PpoLearner>(std::move(policy), std::move(reward_critic), ppo,
                                      effective_ewc(), effective_shaping(), seed);
}

std::string ExperimentConfig::hash() const {
  const std::string dump = to_json().dump();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace safecrl
