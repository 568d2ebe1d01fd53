#include "commands.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lcdqn/errors.h"
#include "lcdqn/harness.h"
#include "lcdqn/model_io.h"
#include "lcdqn/run_config.h"
#include "lcdqn/svg.h"
#include "lcdqn/verify.h"

namespace lcdqn::cli {
namespace {

using nlohmann::ordered_json;

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
  if (!os) throw ConfigError("failed writing " + path.string());
}

TrainRunConfig LoadWithOverrides(const fs::path& path, const RunOverrides& o) {
  TrainRunConfig config = LoadRunConfig(path);
  if (o.episodes) config.total_episodes = *o.episodes;
  if (o.eval_interval) config.eval_interval = *o.eval_interval;
  if (o.eval_episodes) config.eval_episodes = *o.eval_episodes;
  config.Validate();
  return config;
}

ordered_json ReportJson(const harness::EvalReport& r) {
  ordered_json j;
  j["policy_id"] = r.policy_id;
  j["n_episodes"] = r.n_episodes;
  j["completion"] = r.completion_rate;
  j["collision"] = r.collision_rate;
  j["avg_reward"] = r.avg_reward;
  j["avg_velocity"] = r.avg_velocity;
  return j;
}

ordered_json VehicleJson(const env::VehicleState& v, bool ego) {
  ordered_json j;
  j["x"] = v.x;
  j["y"] = v.y;
  j["v"] = v.v;
  if (ego) {
    j["a"] = v.a;
  } else {
    j["direction"] = v.direction;
  }
  return j;
}

ordered_json OthersJson(const std::vector<env::VehicleState>& others) {
  ordered_json j = ordered_json::array();
  for (const auto& v : others) j.push_back(VehicleJson(v, false));
  return j;
}

std::vector<harness::EvalPoint> ReadNonEmptyMetrics(const fs::path& path) {
  auto points = harness::ReadMetrics(path);
  if (points.empty()) throw ConfigError(path.string() + ": no evaluation points");
  return points;
}

svg::Panel TrajectoryCsvPanel(const std::vector<fs::path>& files, double speed,
                              bool accel) {
  svg::Panel panel;
  panel.x_label = "x (m)";
  if (accel) {
    panel.title = "Lateral acceleration y'' v^2";
    panel.y_label = "m/s^2";
  } else {
    panel.title = "Lateral path";
    panel.y_label = "y (m)";
  }
  for (const fs::path& file : files) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot open " + file.string());
    std::string line;
    std::getline(is, line);
    if (line.rfind("x,y,dy,ddy", 0) != 0) {
      throw ConfigError(file.string() + ":1: expected header x,y,dy,ddy");
    }
    svg::Series s;
    s.label = file.stem().string();
    int line_no = 1;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream row(line);
      double v[4];
      char comma;
      if (!(row >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3])) {
        throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                          ": expected four comma-separated numbers");
      }
      s.x.push_back(v[0]);
      s.y.push_back(accel ? v[3] * speed * speed : v[1]);
    }
    if (s.x.empty()) throw ConfigError(file.string() + ": no samples");
    panel.series.push_back(std::move(s));
  }
  return panel;
}

}  // namespace

int Train(const TrainArgs& args) {
  TrainRunConfig config = LoadWithOverrides(args.config, args.overrides);
  if (!args.seeds.empty()) config.seeds = args.seeds;
  if (args.single_seed && config.seeds.size() != 1) {
    throw UsageError("--seed takes exactly one value");
  }
  config.Validate();

  std::vector<fs::path> dirs;
  std::vector<std::string> names;
  for (std::uint64_t seed : config.seeds) {
    const std::string name = args.single_seed ? "." : "seed-" + std::to_string(seed);
    names.push_back(name);
    dirs.push_back(args.single_seed ? args.out : args.out / name);
  }
  fs::create_directories(args.out);

  ordered_json manifest;
  manifest["tool"] = "lcdqn 0.1.0";
  manifest["seeds"] = config.seeds;
  manifest["runs"] = names;
  manifest["config"] = ToJson(config);
  manifest["config_text"] = ToKeyValueText(config);
  WriteText(args.out / "manifest.json", manifest.dump(2) + "\n");
  if (!args.single_seed) {
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      ordered_json run = manifest;
      run["seeds"] = {config.seeds[i]};
      run["runs"] = {"."};
      WriteText(dirs[i] / "manifest.json", run.dump(2) + "\n");
    }
  }

  std::mutex print_mutex;
  std::vector<harness::TrainResult> results(config.seeds.size());
  std::vector<std::exception_ptr> errors(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      const std::uint64_t seed = config.seeds[i];
      harness::TrainOptions options;
      options.out_dir = dirs[i];
      if (!args.quiet) {
        options.on_eval = [&, seed](const harness::EvalPoint& p) {
          std::lock_guard<std::mutex> lock(print_mutex);
          std::cout << "seed " << seed << " episode " << p.episode << " steps "
                    << p.env_steps << " eps " << p.epsilon << " completion "
                    << p.report.completion_rate << "% collision "
                    << p.report.collision_rate << "% velocity "
                    << p.report.avg_velocity << " reward " << p.report.avg_reward
                    << std::endl;
        };
      }
      try {
        results[i] = harness::Train(config, seed, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = std::min<std::size_t>(
      config.seeds.size(), args.jobs > 0 ? static_cast<std::size_t>(args.jobs) : hw);
  std::vector<std::thread> threads;
  for (std::size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& metrics = results[i].metrics;
    const std::size_t best = harness::SelectBest(metrics);
    ordered_json b;
    b["seed"] = config.seeds[i];
    b["index"] = best;
    b["episode"] = metrics[best].episode;
    b["checkpoint_path"] = metrics[best].checkpoint_path;
    b["completion"] = metrics[best].report.completion_rate;
    b["collision"] = metrics[best].report.collision_rate;
    b["avg_velocity"] = metrics[best].report.avg_velocity;
    b["avg_reward"] = metrics[best].report.avg_reward;
    WriteText(dirs[i] / "best.json", b.dump(2) + "\n");
    std::cout << "seed " << config.seeds[i] << " best "
              << (dirs[i] / metrics[best].checkpoint_path).string()
              << " completion " << metrics[best].report.completion_rate
              << "% collision " << metrics[best].report.collision_rate
              << "% velocity " << metrics[best].report.avg_velocity << '\n';
  }
  return 0;
}

int Eval(const EvalArgs& args) {
  const model_io::PolicyModel model = model_io::LoadModel(args.model);
  const TrainRunConfig config = LoadRunConfig(args.config);
  model_io::CheckCompatible(model, config.observation, config.Actions());
  const std::uint64_t base =
      args.seed_base ? *args.seed_base : harness::HeldOutSeedBase(args.seed);
  harness::EvalReport report = harness::Evaluate(
      model.params, harness::MakeSetup(config), args.episodes, base);
  report.policy_id = args.model.filename().string();
  ordered_json j = ReportJson(report);
  j["seed_base"] = base;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (args.out) WriteText(*args.out, text);
  return 0;
}

int Rollout(const RolloutArgs& args) {
  const TrainRunConfig config = LoadRunConfig(args.config);
  const harness::EpisodeSetup setup = harness::MakeSetup(config);
  std::optional<model_io::PolicyModel> model;
  harness::Policy policy;
  std::string policy_name;
  if (args.model) {
    model = model_io::LoadModel(*args.model);
    model_io::CheckCompatible(*model, config.observation, config.Actions());
    policy = harness::GreedyPolicy(model->params);
    policy_name = args.model->filename().string();
  } else if (args.constant_action) {
    const int a = *args.constant_action;
    if (a < 0 || a >= setup.actions.Count()) {
      throw UsageError("--constant-action must lie in [0, " +
                       std::to_string(setup.actions.Count()) + ")");
    }
    policy = [a](const std::vector<double>&) { return a; };
    policy_name = "constant-" + std::to_string(a);
  } else {
    throw UsageError("rollout needs --model or --constant-action");
  }

  const harness::EpisodeResult result = harness::RunEpisode(
      policy, env::Reset(config.scenario, args.seed), setup, true);

  std::ostringstream os;
  ordered_json header;
  header["type"] = "header";
  header["policy"] = policy_name;
  header["scenario"] = env::ToString(config.scenario.kind);
  header["seed"] = args.seed;
  header["steps"] = result.steps;
  header["outcome"] = env::ToString(result.outcome);
  header["episode_return"] = result.episode_return;
  header["initial"] = {{"ego", VehicleJson(result.trace.front().ego, true)},
                       {"others", OthersJson(result.trace.front().others)}};
  os << header.dump() << '\n';
  for (std::size_t i = 1; i < result.trace.size(); ++i) {
    const harness::StepRecord& r = result.trace[i];
    ordered_json j;
    j["step"] = r.step;
    j["ego"] = VehicleJson(r.ego, true);
    j["others"] = OthersJson(r.others);
    j["action"] = r.action;
    j["reward"] = {{"r1", r.outcome.r1},
                   {"r2", r.outcome.r2},
                   {"r3", r.outcome.r3},
                   {"terminal", r.outcome.terminal_bonus},
                   {"total", r.outcome.total}};
    j["status"] = env::ToString(r.status);
    os << j.dump() << '\n';
  }
  WriteText(args.trace, os.str());
  if (args.svg) {
    std::ostringstream svg_text;
    svg::WriteRollout(svg_text, result.trace, config.scenario, args.stride);
    WriteText(*args.svg, svg_text.str());
  }
  std::cout << "outcome " << env::ToString(result.outcome) << " steps "
            << result.steps << " return " << result.episode_return
            << " avg_velocity " << result.avg_velocity << '\n';
  return 0;
}

int Plot(const PlotArgs& args) {
  std::vector<svg::Panel> panels;
  const int modes = (!args.metrics.empty() || !args.groups.empty()) +
                    !args.trajectories.empty() + args.family;
  if (modes != 1) {
    throw UsageError(
        "plot needs exactly one of --metrics/--group, --trajectory or --family");
  }
  if (args.family) {
    std::vector<std::pair<std::string, plan::Trajectory>> family;
    env::VehicleState ego;
    ego.v = args.speed;
    ego.y = 0.5 * args.lane_width;
    for (int d = 1; d <= args.d_max; ++d) {
      const plan::ActionSpec spec =
          plan::DecodeAction(plan::EncodeAction(1, d, args.d_max), args.d_max, 2,
                             args.lane_width);
      const plan::Endpoints ends = plan::MakeTarget(spec, ego);
      family.emplace_back("d = " + std::to_string(d),
                          plan::FitQuintic(ends.start, ends.target, {}));
      if (args.csv_dir) {
        std::ostringstream csv;
        plan::WriteTrajectoryCsv(family.back().second, 0.5, csv);
        WriteText(*args.csv_dir / ("d" + std::to_string(d) + ".csv"), csv.str());
      }
    }
    panels = svg::TrajectoryPanels(family, args.speed);
  } else if (!args.trajectories.empty()) {
    panels = {TrajectoryCsvPanel(args.trajectories, args.speed, false),
              TrajectoryCsvPanel(args.trajectories, args.speed, true)};
  } else {
    std::vector<svg::CurveGroup> groups;
    if (!args.metrics.empty()) {
      svg::CurveGroup g{args.label, {}};
      for (const fs::path& p : args.metrics) g.runs.push_back(ReadNonEmptyMetrics(p));
      groups.push_back(std::move(g));
    }
    for (const std::string& spec : args.groups) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw UsageError("--group expects label=file[,file...], got '" + spec + "'");
      }
      svg::CurveGroup g{spec.substr(0, eq), {}};
      std::stringstream files(spec.substr(eq + 1));
      std::string file;
      while (std::getline(files, file, ',')) {
        if (!file.empty()) g.runs.push_back(ReadNonEmptyMetrics(file));
      }
      if (g.runs.empty()) throw UsageError("--group '" + g.label + "' lists no files");
      groups.push_back(std::move(g));
    }
    panels = svg::TrainingCurvePanels(groups);
  }
  std::ostringstream os;
  svg::WritePanels(os, panels);
  WriteText(args.out, os.str());
  return 0;
}

int Verify(const VerifyArgs& args) {
  const auto results = verify::RunChecks(verify::ParseFault(args.fault));
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

int PrintConfig(const ConfigArgs& args) {
  const TrainRunConfig config =
      args.config ? LoadRunConfig(*args.config)
                  : DefaultRunConfig(env::ParseScenarioKind(args.scenario),
                                     observe::ParseObservationKind(args.observation));
  if (args.json) {
    std::cout << ToJson(config).dump(2) << '\n';
  } else {
    std::cout << ToKeyValueText(config);
  }
  return 0;
}

}  // namespace lcdqn::cli
