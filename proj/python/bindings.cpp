#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "safecrl/agents/ewc.hpp"
#include "safecrl/envs/oracle.hpp"
#include "safecrl/envs/pointvel.hpp"
#include "safecrl/metrics/continual.hpp"
#include "safecrl/rollout/advantage.hpp"
#include "safecrl/runner/config.hpp"
#include "safecrl/runner/runner.hpp"

namespace py = pybind11;
using namespace safecrl;

namespace {

TaskId parse_task(const std::string& name) { return task_from_string(name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "safecrl core: environments, estimators, metrics and the runner";

  py::register_exception<ConfigError>(m, "ConfigurationError");
  py::register_exception<NumericError>(m, "NumericError");

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("next_obs", &StepResult::next_obs)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("cost", &StepResult::cost)
      .def_readonly("terminated", &StepResult::terminated)
      .def_readonly("truncated", &StepResult::truncated);

  py::class_<PointVelEnv>(m, "PointVelEnv")
      .def(py::init<>())
      .def("reset", &PointVelEnv::reset, py::arg("seed"))
      .def("step", &PointVelEnv::step, py::arg("action"))
      .def("apply_task",
           [](PointVelEnv& env, const std::string& task) { env.apply_task(parse_task(task)); })
      .def("active_task", [](const PointVelEnv& env) { return to_string(env.active_task()); })
      .def("actuation", &PointVelEnv::actuation)
      .def("clip_count", &PointVelEnv::clip_count)
      .def_property_readonly("obs_dim", [](const PointVelEnv& e) { return e.spec().obs_dim; })
      .def_property_readonly("act_dim", [](const PointVelEnv& e) { return e.spec().act_dim; });

  py::class_<GridCrawlEnv>(m, "GridCrawlEnv")
      .def(py::init<>())
      .def("reset", &GridCrawlEnv::reset, py::arg("seed") = 0)
      .def("step",
           [](GridCrawlEnv& env, int action) {
             Vec a(1);
             a[0] = action;
             return env.step(a);
           },
           py::arg("action"))
      .def("apply_task",
           [](GridCrawlEnv& env, const std::string& task) { env.apply_task(parse_task(task)); })
      .def("active_task", [](const GridCrawlEnv& env) { return to_string(env.active_task()); })
      .def("action_mask", &GridCrawlEnv::action_mask)
      .def("num_states", &GridCrawlEnv::num_states)
      .def("is_hazard", &GridCrawlEnv::is_hazard);

  m.def("solve_gridcrawl_oracle",
        [](const std::string& task, double cost_limit) {
          GridCrawlEnv env;
          const OracleResult r = solve_gridcrawl_oracle(env, parse_task(task), cost_limit);
          py::dict out;
          out["feasible"] = r.feasible;
          out["value"] = r.value;
          out["expected_cost"] = r.expected_cost;
          out["min_expected_cost"] = r.min_expected_cost;
          out["policy"] = r.policy;
          return out;
        },
        py::arg("task"), py::arg("cost_limit"),
        "Constrained optimum of a default-layout GridCrawl task");

  m.def("discounted_returns",
        [](const Vec& rewards, double gamma, double bootstrap) {
          return discounted_returns(rewards, gamma, bootstrap);
        },
        py::arg("rewards"), py::arg("gamma"), py::arg("bootstrap") = 0.0);
  m.def("gae", &gae, py::arg("rewards"), py::arg("values"), py::arg("bootstrap"),
        py::arg("gamma"), py::arg("lambda_"));
  m.def("shape_reward",
        [](double r, double c, double beta) {
          return shape_reward(r, c, ShapingConfig{beta, true});
        },
        py::arg("reward"), py::arg("cost"), py::arg("beta"));
  m.def("select_beta", [](double max_reward, double max_cost) -> py::object {
    const BetaSelection b = select_beta(max_reward, max_cost);
    if (!b.defined) return py::none();
    return py::float_(b.beta);
  });
  m.def("ewc_penalty",
        [](const Vec& params, const Vec& anchor, const Vec& fisher, double lambda) {
          TaskSnapshot snap{TaskId::nominal(), anchor, fisher};
          const EwcPenalty p = ewc_penalty(params, {snap}, lambda);
          return py::make_tuple(p.value, p.grad);
        },
        py::arg("params"), py::arg("anchor"), py::arg("fisher"), py::arg("lambda_"));

  py::class_<VisitLog>(m, "VisitLog")
      .def(py::init([](const std::string& task, int visit, double step_cost_sum,
                       int64_t step_count, const std::vector<double>& episode_rewards) {
             VisitLog v;
             v.task = parse_task(task);
             v.visit = visit;
             v.step_cost_sum = step_cost_sum;
             v.step_count = step_count;
             v.episode_rewards = episode_rewards;
             return v;
           }),
           py::arg("task"), py::arg("visit"), py::arg("step_cost_sum"),
           py::arg("step_count"), py::arg("episode_rewards"))
      .def("immediate", &VisitLog::immediate)
      .def("final_reward", &VisitLog::final_reward);

  m.def("total_cost",
        [](const std::vector<VisitLog>& visits) { return total_cost(visits).value; });
  m.def("forget_percentage", [](const std::vector<VisitLog>& visits) {
    return forget_percentage(visits).percent;
  });
  m.def("final_task_reward", [](const std::vector<VisitLog>& visits) -> py::object {
    const FinalRewardResult r = final_task_reward(visits);
    if (!r.available) return py::none();
    return py::float_(r.value);
  });
  m.def("aggregate_seeds", [](const std::vector<double>& values) {
    const SeedAggregate a = aggregate_seeds(values);
    return py::make_tuple(a.mean, a.stddev_defined ? py::object(py::float_(a.stddev))
                                                   : py::object(py::none()));
  });

  m.def("run_experiment",
        [](const std::string& config_json) {
          const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
          return run_experiment(cfg);
        },
        py::arg("config_json"),
        "Runs a full experiment from a JSON config string; returns the exit status");

  m.attr("__version__") = kLibraryVersion;
}
