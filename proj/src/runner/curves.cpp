#include "safecrl/runner/curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "safecrl/metrics/continual.hpp"
#include "safecrl/runner/runner.hpp"

namespace safecrl {

using nlohmann::json;

namespace {

struct CurvePoint {
  int64_t step = 0;
  std::string task;
  std::vector<double> values;  // one per seed
};

struct Boundary {
  int64_t step = 0;
  std::string task;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// ---------------------------------------------------------------------------
// minimal SVG line plot

struct SvgPlot {
  std::string title;
  std::vector<double> x, mean, stddev;  // stddev empty -> no band
  std::vector<Boundary> boundaries;
};

void write_svg(const std::string& path, const SvgPlot& plot) {
  const double w = 860, h = 420, ml = 70, mr = 20, mt = 40, mb = 45;
  double xmin = plot.x.front(), xmax = plot.x.back();
  double ymin = plot.mean.front(), ymax = plot.mean.front();
  for (size_t i = 0; i < plot.mean.size(); ++i) {
    const double band = plot.stddev.empty() ? 0.0 : plot.stddev[i];
    ymin = std::min(ymin, plot.mean[i] - band);
    ymax = std::max(ymax, plot.mean[i] + band);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (v - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='22' text-anchor='middle' font-size='15'>"
      << plot.title << "</text>\n";

  for (const auto& b : plot.boundaries) {
    const double xx = px(static_cast<double>(b.step));
    out << "<line x1='" << xx << "' y1='" << mt << "' x2='" << xx << "' y2='" << h - mb
        << "' stroke='#999' stroke-dasharray='4 3'/>\n";
    out << "<text x='" << xx + 3 << "' y='" << mt + 12 << "' font-size='10' fill='#555'>"
        << b.task << "</text>\n";
  }

  if (!plot.stddev.empty()) {
    out << "<polygon fill='#4477aa' fill-opacity='0.25' stroke='none' points='";
    for (size_t i = 0; i < plot.x.size(); ++i)
      out << px(plot.x[i]) << ',' << py(plot.mean[i] + plot.stddev[i]) << ' ';
    for (size_t i = plot.x.size(); i-- > 0;)
      out << px(plot.x[i]) << ',' << py(plot.mean[i] - plot.stddev[i]) << ' ';
    out << "'/>\n";
  }

  out << "<polyline fill='none' stroke='#4477aa' stroke-width='1.6' points='";
  for (size_t i = 0; i < plot.x.size(); ++i)
    out << px(plot.x[i]) << ',' << py(plot.mean[i]) << ' ';
  out << "'/>\n";

  out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='"
      << h - mb << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", xv);
    out << "<text x='" << px(xv) << "' y='" << h - mb + 16
        << "' text-anchor='middle' font-size='10'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%g", yv);
    out << "<text x='" << ml - 6 << "' y='" << py(yv) + 3
        << "' text-anchor='end' font-size='10'>" << buf << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

int emit_curves(const std::string& run_dir, std::ostream& report) {
  std::ifstream mf(run_dir + "/manifest.json");
  if (!mf) {
    report << "missing: " << run_dir << "/manifest.json\n";
    return 2;
  }
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    report << "unreadable manifest: " << e.what() << '\n';
    return 2;
  }

  std::vector<uint64_t> seeds;
  for (const auto& entry : manifest.at("seeds"))
    if (entry.at("status").get<std::string>() == "ok")
      seeds.push_back(entry.at("seed").get<uint64_t>());
  if (seeds.empty()) {
    report << "no successful seeds in " << run_dir << '\n';
    return 2;
  }

  // verify all inputs before writing anything
  for (uint64_t seed : seeds) {
    const std::string p = run_dir + "/seed_" + std::to_string(seed) + "/runlog.csv";
    if (!std::ifstream(p)) {
      report << "missing: " << p << '\n';
      return 2;
    }
  }

  std::map<int64_t, CurvePoint> reward_curve, cost_curve;
  for (size_t si = 0; si < seeds.size(); ++si) {
    std::ifstream in(run_dir + "/seed_" + std::to_string(seeds[si]) + "/runlog.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto f = split_csv(line);
      if (f.size() < 8) continue;
      const int64_t step = std::stoll(f[1]);
      for (auto* curve : {&reward_curve, &cost_curve}) {
        auto& pt = (*curve)[step];
        pt.step = step;
        pt.task = f[2];
        if (pt.values.size() != seeds.size())
          pt.values.assign(seeds.size(), std::numeric_limits<double>::quiet_NaN());
      }
      reward_curve[step].values[si] = std::stod(f[5]);
      cost_curve[step].values[si] = std::stod(f[6]);
    }
  }

  std::vector<Boundary> boundaries;
  int64_t acc = 0;
  for (const auto& seg : manifest.at("config").at("schedule")) {
    boundaries.push_back({acc, seg.at("task").get<std::string>()});
    acc += seg.at("budget").get<int64_t>();
  }

  auto emit_curve = [&](const std::map<int64_t, CurvePoint>& curve,
                        const std::string& name, const std::string& title) {
    std::ofstream csv(run_dir + "/" + name + ".csv");
    csv << "global_step,task,mean,std,n\n";
    SvgPlot plot;
    plot.title = title;
    plot.boundaries = boundaries;
    const bool with_band = seeds.size() >= 2;
    for (const auto& [step, pt] : curve) {
      std::vector<double> vals;
      for (double v : pt.values)
        if (std::isfinite(v)) vals.push_back(v);
      if (vals.empty()) continue;
      const SeedAggregate agg = aggregate_seeds(vals);
      csv << step << ',' << pt.task << ',' << format_double(agg.mean) << ','
          << (agg.stddev_defined ? format_double(agg.stddev) : "") << ',' << vals.size()
          << '\n';
      plot.x.push_back(static_cast<double>(step));
      plot.mean.push_back(agg.mean);
      if (with_band) plot.stddev.push_back(agg.stddev_defined ? agg.stddev : 0.0);
    }
    if (!plot.x.empty()) write_svg(run_dir + "/" + name + ".svg", plot);
  };
  emit_curve(reward_curve, "curve_reward", "Mean episodic reward during training");
  emit_curve(cost_curve, "curve_cost", "Mean episodic cost during training");

  // immediate reward on each nominal visit (how well nominal was remembered)
  std::map<int, std::vector<double>> immediate_by_visit;
  try {
    const auto by_seed = load_visits(run_dir);
    for (const auto& [seed, visits] : by_seed)
      for (const auto& v : visits)
        if (v.task == TaskId::nominal() && v.has_episodes())
          immediate_by_visit[v.visit].push_back(v.immediate());
  } catch (const std::exception& e) {
    report << "visit logs unavailable: " << e.what() << '\n';
    return 2;
  }
  if (!immediate_by_visit.empty()) {
    std::ofstream csv(run_dir + "/immediate_nominal.csv");
    csv << "visit,mean,std,n\n";
    SvgPlot plot;
    plot.title = "Immediate nominal-task reward per visit";
    const bool with_band = seeds.size() >= 2;
    for (const auto& [visit, vals] : immediate_by_visit) {
      const SeedAggregate agg = aggregate_seeds(vals);
      csv << visit << ',' << format_double(agg.mean) << ','
          << (agg.stddev_defined ? format_double(agg.stddev) : "") << ',' << vals.size()
          << '\n';
      plot.x.push_back(visit);
      plot.mean.push_back(agg.mean);
      if (with_band) plot.stddev.push_back(agg.stddev_defined ? agg.stddev : 0.0);
    }
    write_svg(run_dir + "/immediate_nominal.svg", plot);
  }
  return 0;
}

}  // namespace safecrl
