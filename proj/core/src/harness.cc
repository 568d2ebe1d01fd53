#include "lcdqn/harness.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lcdqn/errors.h"
#include "lcdqn/longctl.h"
#include "lcdqn/model_io.h"

namespace lcdqn::harness {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kStateFile = "trainer-state.json";
constexpr const char* kReplayFile = "replay.bin";
constexpr const char* kMetricsFile = "metrics.jsonl";

std::string CheckpointName(int episode) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt-%06d", episode);
  return buf;
}

json MetricsToJson(const EvalPoint& p) {
  return json::parse(MetricsLine(p));
}

}  // namespace

Policy GreedyPolicy(const nn::NetworkParams& params) {
  return [params](const std::vector<double>& obs) {
    return dqn::Argmax(nn::PredictOne(params, obs));
  };
}

EpisodeSetup MakeSetup(const TrainRunConfig& config) {
  return {config.scenario, config.observation, config.Actions(),
          config.reward_scale};
}

LaneChangeDriver::Command LaneChangeDriver::Plan(
    const env::WorldState& world, const env::ScenarioConfig& scenario,
    const plan::ActionSpace& actions, int action) {
  const env::VehicleState& ego = world.ego;
  if (action != active_action_ || !traj_) {
    const plan::ActionSpec spec = plan::DecodeAction(
        action, actions.d_max, actions.n_lanes, actions.lane_width);
    const plan::LateralPoint current =
        traj_ ? traj_->Sample(ego.x) : plan::LateralPoint{ego.y, 0.0, 0.0};
    try {
      const plan::Endpoints ends = plan::MakeTarget(spec, ego);
      traj_ = plan::FitQuintic(ends.start, ends.target,
                               {current.dy, current.ddy});
      active_action_ = action;
    } catch (const NumericalError&) {
      // Too slow for a usable horizon: keep the current path.
      if (!traj_) traj_ = plan::HoldLane(ego.x, ego.y);
    }
  }

  Command cmd;
  const auto gap = longctl::FrontVehicle(world, scenario, -1);
  cmd.accel = longctl::AccelCommand(
      ego.v, gap, longctl::ControllerParams::FromScenario(scenario),
      scenario.v_max);
  const env::EgoPrediction next = env::PredictEgo(ego, scenario, cmd.accel);
  cmd.lateral = traj_->SampleLateral(next.x, next.v);
  return cmd;
}

EpisodeResult RunEpisode(const Policy& policy, env::WorldState world,
                         const EpisodeSetup& setup, bool record,
                         const TransitionSink& sink) {
  EpisodeResult result;
  LaneChangeDriver driver;
  if (record) {
    StepRecord initial;
    initial.ego = world.ego;
    initial.others = world.others;
    initial.lateral = world.ego_lateral;
    initial.status = world.status;
    result.trace.push_back(std::move(initial));
  }

  std::vector<double> obs =
      observe::Encode(world, setup.observation, setup.scenario);
  double speed_sum = 0.0;
  while (world.status == env::EpisodeStatus::kRunning) {
    const int action = policy(obs);
    const auto cmd = driver.Plan(world, setup.scenario, setup.actions, action);
    const env::StepOutcome outcome =
        env::Step(world, setup.scenario, cmd.lateral, cmd.accel);
    std::vector<double> next_obs =
        observe::Encode(world, setup.observation, setup.scenario);

    result.episode_return += outcome.total;
    speed_sum += world.ego.v;
    ++result.steps;
    if (sink) {
      const bool terminal = outcome.reason == env::EpisodeStatus::kSuccess ||
                            outcome.reason == env::EpisodeStatus::kCollision;
      sink({obs, action, outcome.total * setup.reward_scale, next_obs, terminal});
    }
    if (record) {
      StepRecord r;
      r.step = world.step_index;
      r.ego = world.ego;
      r.others = world.others;
      r.lateral = world.ego_lateral;
      r.action = action;
      r.outcome = outcome;
      r.status = world.status;
      result.trace.push_back(std::move(r));
    }
    obs = std::move(next_obs);
  }
  result.outcome = world.status;
  result.avg_velocity = result.steps > 0 ? speed_sum / result.steps : 0.0;
  return result;
}

EvalReport Aggregate(const std::vector<EpisodeResult>& episodes) {
  EvalReport r;
  r.n_episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return r;
  int success = 0, collision = 0;
  // Summing sorted values keeps the report independent of episode order.
  std::vector<double> rewards, velocities;
  for (const EpisodeResult& e : episodes) {
    success += e.outcome == env::EpisodeStatus::kSuccess;
    collision += e.outcome == env::EpisodeStatus::kCollision;
    rewards.push_back(e.episode_return);
    velocities.push_back(e.avg_velocity);
  }
  std::sort(rewards.begin(), rewards.end());
  std::sort(velocities.begin(), velocities.end());
  double reward_sum = 0.0, velocity_sum = 0.0;
  for (double v : rewards) reward_sum += v;
  for (double v : velocities) velocity_sum += v;
  const double n = static_cast<double>(episodes.size());
  r.completion_rate = 100.0 * success / n;
  r.collision_rate = 100.0 * collision / n;
  r.avg_reward = reward_sum / n;
  r.avg_velocity = velocity_sum / n;
  return r;
}

EvalReport Evaluate(const nn::NetworkParams& params, const EpisodeSetup& setup,
                    int n_episodes, std::uint64_t seed_base) {
  if (n_episodes < 1) throw UsageError("Evaluate: n_episodes must be >= 1");
  const Policy policy = GreedyPolicy(params);
  std::vector<EpisodeResult> episodes;
  episodes.reserve(n_episodes);
  for (int i = 0; i < n_episodes; ++i) {
    episodes.push_back(RunEpisode(
        policy, env::Reset(setup.scenario, seed_base + i), setup, false));
  }
  return Aggregate(episodes);
}

std::uint64_t TrainEpisodeSeed(std::uint64_t run_seed, std::int64_t episode) {
  return MixSeed(MixSeed(run_seed) + static_cast<std::uint64_t>(episode)) &
         0x3fffffffffffffffULL;
}

std::uint64_t EvalSeedBase(std::uint64_t run_seed) {
  return 0x8000000000000000ULL | ((run_seed & 0xfffffffULL) << 32);
}

std::uint64_t HeldOutSeedBase(std::uint64_t run_seed) {
  return 0xc000000000000000ULL | ((run_seed & 0xfffffffULL) << 32);
}

std::string MetricsLine(const EvalPoint& p) {
  ordered_json j;
  j["episode"] = p.episode;
  j["env_steps"] = p.env_steps;
  j["epsilon"] = p.epsilon;
  j["completion"] = p.report.completion_rate;
  j["collision"] = p.report.collision_rate;
  j["avg_reward"] = p.report.avg_reward;
  j["avg_velocity"] = p.report.avg_velocity;
  j["checkpoint_path"] = p.checkpoint_path;
  return j.dump();
}

EvalPoint ParseMetricsLine(const std::string& line) {
  try {
    const json j = json::parse(line);
    EvalPoint p;
    p.episode = j.at("episode").get<int>();
    p.env_steps = j.at("env_steps").get<std::int64_t>();
    p.epsilon = j.at("epsilon").get<double>();
    p.report.completion_rate = j.at("completion").get<double>();
    p.report.collision_rate = j.at("collision").get<double>();
    p.report.avg_reward = j.at("avg_reward").get<double>();
    p.report.avg_velocity = j.at("avg_velocity").get<double>();
    p.checkpoint_path = j.value("checkpoint_path", "");
    p.report.policy_id = p.checkpoint_path;
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad metrics line: ") + e.what());
  }
}

std::vector<EvalPoint> ReadMetrics(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open metrics file " + path.string());
  std::vector<EvalPoint> points;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      points.push_back(ParseMetricsLine(line));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return points;
}

std::size_t SelectBest(const std::vector<EvalPoint>& points) {
  if (points.empty()) throw UsageError("SelectBest: no checkpoints");
  auto key = [](const EvalPoint& p) {
    return std::make_tuple(p.report.completion_rate, -p.report.collision_rate,
                           p.report.avg_velocity, p.report.avg_reward);
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (key(points[i]) > key(points[best])) best = i;
  }
  return best;
}

TrainerState MakeTrainerState(const TrainRunConfig& config,
                              std::uint64_t seed) {
  const nn::Architecture arch = config.MakeArchitecture();
  nn::NetworkParams main = nn::Init(arch, MixSeed(seed ^ 0x6e6574ULL));
  nn::NetworkParams target = main;
  nn::AdamState adam = nn::MakeAdam(main, config.dqn.learning_rate);
  dqn::ReplayBuffer buffer(config.dqn.buffer_capacity,
                           config.observation.Dimension(),
                           config.Actions().Count());
  TrainerState state{std::move(main),
                     std::move(target),
                     std::move(adam),
                     std::move(buffer),
                     Rng(MixSeed(seed ^ 0x727567ULL)),
                     0,
                     0,
                     0,
                     0.0,
                     seed,
                     {},
                     {}};
  return state;
}

void SaveTrainerState(const TrainerState& state,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["format"] = "lcdqn-trainer-state";
  j["format_version"] = 1;
  j["run_seed"] = state.run_seed;
  j["fingerprint"] = state.main.fingerprint;
  j["env_steps"] = state.env_steps;
  j["gradient_steps"] = state.gradient_steps;
  j["episodes_done"] = state.episodes_done;
  j["last_loss"] = state.last_loss;
  j["rng"] = SaveRngState(state.rng);
  j["main"] = model_io::TensorsToJson(state.main.tensors);
  j["target"] = model_io::TensorsToJson(state.target.tensors);
  j["adam"] = {{"step", state.adam.step},
               {"learning_rate", state.adam.learning_rate},
               {"beta1", state.adam.beta1},
               {"beta2", state.adam.beta2},
               {"epsilon", state.adam.epsilon},
               {"m", model_io::TensorsToJson(state.adam.m)},
               {"v", model_io::TensorsToJson(state.adam.v)}};
  j["metrics"] = json::array();
  for (const EvalPoint& p : state.metrics) j["metrics"].push_back(MetricsToJson(p));
  j["checkpoints"] = json::array();
  for (const auto& c : state.checkpoints) {
    j["checkpoints"].push_back(model_io::TensorsToJson(c.tensors));
  }
  {
    std::ofstream os(dir / kStateFile);
    os << j.dump() << '\n';
    if (!os) throw ConfigError("failed writing " + (dir / kStateFile).string());
  }
  std::ofstream bin(dir / kReplayFile, std::ios::binary);
  state.buffer.Save(bin);
  if (!bin) throw ConfigError("failed writing " + (dir / kReplayFile).string());
}

TrainerState LoadTrainerState(const TrainRunConfig& config,
                              const std::filesystem::path& dir) {
  std::ifstream is(dir / kStateFile);
  if (!is) throw ConfigError("cannot open " + (dir / kStateFile).string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError((dir / kStateFile).string() + ": " + e.what());
  }
  if (j.value("format", "") != "lcdqn-trainer-state") {
    throw ConfigError((dir / kStateFile).string() + ": not a trainer state");
  }
  TrainerState state = MakeTrainerState(config, j.at("run_seed").get<std::uint64_t>());
  if (j.at("fingerprint").get<std::string>() != state.main.fingerprint) {
    throw ConfigError("trainer state architecture does not match the config");
  }
  auto load_params = [&](nn::NetworkParams& p, const json& t) {
    auto tensors = model_io::TensorsFromJson(t);
    if (tensors.size() != p.tensors.size()) {
      throw ConfigError("trainer state tensor count mismatch");
    }
    p.tensors = std::move(tensors);
  };
  load_params(state.main, j.at("main"));
  load_params(state.target, j.at("target"));
  state.env_steps = j.at("env_steps").get<std::int64_t>();
  state.gradient_steps = j.at("gradient_steps").get<std::int64_t>();
  state.episodes_done = j.at("episodes_done").get<int>();
  state.last_loss = j.at("last_loss").get<double>();
  LoadRngState(state.rng, j.at("rng").get<std::string>());
  const json& adam = j.at("adam");
  state.adam.step = adam.at("step").get<std::uint64_t>();
  state.adam.learning_rate = adam.at("learning_rate").get<double>();
  state.adam.beta1 = adam.at("beta1").get<double>();
  state.adam.beta2 = adam.at("beta2").get<double>();
  state.adam.epsilon = adam.at("epsilon").get<double>();
  state.adam.m = model_io::TensorsFromJson(adam.at("m"));
  state.adam.v = model_io::TensorsFromJson(adam.at("v"));
  for (const json& m : j.at("metrics")) state.metrics.push_back(ParseMetricsLine(m.dump()));
  for (const json& c : j.at("checkpoints")) {
    nn::NetworkParams p = state.main;
    load_params(p, c);
    state.checkpoints.push_back(std::move(p));
  }
  std::ifstream bin(dir / kReplayFile, std::ios::binary);
  if (!bin) throw ConfigError("cannot open " + (dir / kReplayFile).string());
  state.buffer = dqn::ReplayBuffer::Load(bin);
  return state;
}

TrainResult Train(const TrainRunConfig& config, std::uint64_t seed,
                  const TrainOptions& options) {
  config.Validate();
  const EpisodeSetup setup = MakeSetup(config);
  TrainerState state = options.resume_from
                           ? LoadTrainerState(config, *options.resume_from)
                           : MakeTrainerState(config, seed);
  if (state.run_seed != seed) {
    throw ConfigError("resumed state was trained with seed " +
                      std::to_string(state.run_seed) + ", not " +
                      std::to_string(seed));
  }

  std::ofstream metrics_out;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    metrics_out.open(*options.out_dir / kMetricsFile, std::ios::trunc);
    if (!metrics_out) {
      throw ConfigError("cannot write " + (*options.out_dir / kMetricsFile).string());
    }
    for (const EvalPoint& p : state.metrics) metrics_out << MetricsLine(p) << '\n';
  }

  const dqn::DqnConfig& dc = config.dqn;
  const std::size_t warmup =
      std::max(dc.train_start_size, static_cast<std::size_t>(dc.batch_size));
  const TransitionSink sink = [&](const dqn::Transition& t) {
    state.buffer.Push(t);
    ++state.env_steps;
    if (state.buffer.size() >= warmup && state.env_steps % dc.train_interval == 0) {
      const dqn::Batch batch = state.buffer.Sample(dc.batch_size, state.rng);
      state.last_loss = dqn::TrainStep(state.main, state.adam, state.target,
                                       batch, dc.gamma, dc.double_dqn);
      ++state.gradient_steps;
    }
    if (state.env_steps % dc.target_sync_interval == 0) {
      dqn::SyncTarget(state.main, state.target);
    }
  };
  const Policy explore = [&](const std::vector<double>& obs) {
    return dqn::SelectAction(state.main, obs, dc.epsilon.At(state.env_steps),
                             state.rng);
  };

  while (state.episodes_done < config.total_episodes) {
    const env::WorldState world =
        env::Reset(config.scenario, TrainEpisodeSeed(seed, state.episodes_done));
    try {
      RunEpisode(explore, world, setup, false, sink);
    } catch (const TrainingError&) {
      if (options.out_dir) SaveTrainerState(state, *options.out_dir / "aborted");
      throw;
    }
    ++state.episodes_done;

    if (state.episodes_done % config.eval_interval == 0) {
      EvalPoint point;
      point.episode = state.episodes_done;
      point.env_steps = state.env_steps;
      point.epsilon = dc.epsilon.At(state.env_steps);
      point.report = Evaluate(state.main, setup, config.eval_episodes,
                              EvalSeedBase(seed));
      point.checkpoint_path = CheckpointName(state.episodes_done) + ".json";
      point.report.policy_id = point.checkpoint_path;
      state.metrics.push_back(point);
      state.checkpoints.push_back(state.main);
      if (options.out_dir) {
        model_io::SaveModel({state.main, config.observation, config.Actions()},
                            *options.out_dir / point.checkpoint_path);
        metrics_out << MetricsLine(point) << '\n';
        metrics_out.flush();
      }
      if (options.on_eval) options.on_eval(point);
    }
  }
  if (options.save_final_state && options.out_dir) {
    SaveTrainerState(state, *options.out_dir / "state");
  }
  return {state.metrics, state.checkpoints, state.env_steps,
          state.gradient_steps};
}

}  // namespace lcdqn::harness
