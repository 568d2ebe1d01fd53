#include "lcdqn/run_config.h"

#include <charconv>
#include <sstream>

#include "lcdqn/errors.h"
#include "lcdqn/model_io.h"

namespace lcdqn {
namespace {

template <typename Scenario, typename Visitor>
void VisitScenario(Scenario& s, Visitor&& v) {
  v("scenario.n_non_ego", s.n_non_ego);
  v("scenario.n_lanes", s.n_lanes);
  v("scenario.lane_width", s.lane_width);
  v("scenario.initial_lane", s.initial_lane);
  v("scenario.v_ego_init", s.v_ego_init);
  v("scenario.v_max", s.v_max);
  v("scenario.v_non_limit", s.v_non_limit);
  v("scenario.view_range", s.view_range);
  v("scenario.initiation_range", s.initiation_range);
  v("scenario.dt", s.dt);
  v("scenario.max_steps", s.max_steps);
  v("scenario.safety_distance", s.safety_distance);
  v("scenario.controller_gain", s.controller_gain);
  v("scenario.min_spawn_gap", s.min_spawn_gap);
  v("scenario.a_min", s.a_min);
  v("scenario.a_max", s.a_max);
  v("scenario.vehicle_length", s.vehicle_length);
  v("scenario.vehicle_width", s.vehicle_width);
  v("scenario.completion_margin", s.completion_margin);
  v("scenario.lane_tolerance", s.lane_tolerance);
  v("reward.w_lat_acc", s.reward.w_lat_acc);
  v("reward.w_speed", s.reward.w_speed);
  v("reward.w_long_acc", s.reward.w_long_acc);
  v("reward.lane_quadratic", s.reward.lane_quadratic);
  v("reward.lane_linear", s.reward.lane_linear);
  v("reward.lane_constant", s.reward.lane_constant);
  v("reward.w_non", s.reward.w_non);
  v("reward.completion_bonus", s.reward.completion_bonus);
  v("reward.collision_penalty", s.reward.collision_penalty);
}

template <typename Spec, typename Visitor>
void VisitObservation(Spec& o, Visitor&& v) {
  v("observation.view_range", o.view_range);
  v("observation.position_scale", o.position_scale);
  v("observation.lateral_scale", o.lateral_scale);
  v("observation.velocity_scale", o.velocity_scale);
  v("observation.slot_count", o.slot_count);
  v("observation.grid_rows", o.grid_rows);
  v("observation.grid_cols", o.grid_cols);
  v("observation.cell_length", o.cell_length);
}

template <typename Config, typename Visitor>
void VisitTraining(Config& c, Visitor&& v) {
  v("action.d_max", c.d_max);
  v("network.hidden_units", c.hidden_units);
  v("network.hidden_layers", c.hidden_layers);
  v("dqn.gamma", c.dqn.gamma);
  v("dqn.batch_size", c.dqn.batch_size);
  v("dqn.target_sync_interval", c.dqn.target_sync_interval);
  v("dqn.learning_rate", c.dqn.learning_rate);
  v("dqn.buffer_capacity", c.dqn.buffer_capacity);
  v("dqn.train_start_size", c.dqn.train_start_size);
  v("dqn.train_interval", c.dqn.train_interval);
  v("dqn.double_dqn", c.dqn.double_dqn);
  v("dqn.epsilon_start", c.dqn.epsilon.start);
  v("dqn.epsilon_end", c.dqn.epsilon.end);
  v("dqn.epsilon_decay_steps", c.dqn.epsilon.decay_steps);
  v("dqn.reward_scale", c.reward_scale);
  v("run.total_episodes", c.total_episodes);
  v("run.eval_interval", c.eval_interval);
  v("run.eval_episodes", c.eval_episodes);
}

std::string FormatValue(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}
template <typename T>
std::string FormatValue(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else {
    return std::to_string(v);
  }
}

}  // namespace

nn::Architecture TrainRunConfig::MakeArchitecture() const {
  const int actions = Actions().Count();
  if (observation.kind == observe::ObservationKind::kGrid) {
    return nn::MakeGridArchitecture(observation.grid_rows, observation.grid_cols,
                                    actions, hidden_units);
  }
  return nn::MakeListArchitecture(observation.Dimension(), actions,
                                  hidden_units, hidden_layers);
}

void TrainRunConfig::Validate() const {
  scenario.Validate();
  observation.Validate();
  dqn.Validate();
  if (d_max < 1) throw ConfigError("action.d_max must be >= 1");
  if (hidden_units < 1 || hidden_layers < 0) {
    throw ConfigError("network: hidden_units must be >= 1, hidden_layers >= 0");
  }
  if (observation.kind != observe::ObservationKind::kGrid &&
      observation.slot_count < scenario.n_non_ego) {
    throw ConfigError("observation.slot_count must be >= scenario.n_non_ego");
  }
  if (observation.kind == observe::ObservationKind::kGrid &&
      observation.grid_rows != scenario.n_lanes) {
    throw ConfigError("observation.grid_rows must equal scenario.n_lanes");
  }
  if (!(reward_scale > 0.0)) throw ConfigError("dqn.reward_scale must be > 0");
  if (total_episodes < 1 || eval_episodes < 1 || eval_interval < 1 ||
      eval_interval > total_episodes) {
    throw ConfigError(
        "run: need total_episodes >= 1, eval_episodes >= 1 and "
        "1 <= eval_interval <= total_episodes");
  }
  if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
  MakeArchitecture().Validate();
}

TrainRunConfig DefaultRunConfig(env::ScenarioKind scenario,
                                observe::ObservationKind observation) {
  TrainRunConfig c;
  c.scenario.kind = scenario;
  c.observation = observe::MakeObservationSpec(observation, c.scenario);
  return c;
}

TrainRunConfig RunConfigFromFile(const KeyValueFile& file) {
  TrainRunConfig c;
  auto read = [&](const std::string& key, auto& field) { file.Read(key, field); };
  if (file.Has("scenario.kind")) {
    c.scenario.kind = env::ParseScenarioKind(file.GetString("scenario.kind"));
  }
  VisitScenario(c.scenario, read);

  observe::ObservationKind kind = observe::ObservationKind::kLimited;
  if (file.Has("observation.kind")) {
    kind = observe::ParseObservationKind(file.GetString("observation.kind"));
  }
  c.observation = observe::MakeObservationSpec(kind, c.scenario);
  VisitObservation(c.observation, read);
  VisitTraining(c, read);
  if (file.Has("run.seeds")) c.seeds = file.GetUintList("run.seeds");
  file.RejectUnused();
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(file.source() + ": " + e.what());
  }
  return c;
}

TrainRunConfig LoadRunConfig(const std::filesystem::path& path) {
  return RunConfigFromFile(KeyValueFile::Load(path));
}

std::string ToKeyValueText(const TrainRunConfig& config) {
  std::ostringstream os;
  auto write = [&](const std::string& key, const auto& value) {
    os << key << " = " << FormatValue(value) << '\n';
  };
  os << "scenario.kind = " << env::ToString(config.scenario.kind) << '\n';
  VisitScenario(config.scenario, write);
  os << "observation.kind = " << observe::ToString(config.observation.kind)
     << '\n';
  VisitObservation(config.observation, write);
  VisitTraining(config, write);
  os << "run.seeds = ";
  for (size_t i = 0; i < config.seeds.size(); ++i) {
    os << (i ? ", " : "") << config.seeds[i];
  }
  os << '\n';
  return os.str();
}

nlohmann::json ToJson(const TrainRunConfig& config) {
  nlohmann::json j;
  j["scenario"] = model_io::ToJson(config.scenario);
  j["observation"] = model_io::ToJson(config.observation);
  j["actions"] = model_io::ToJson(config.Actions());
  j["architecture"] = model_io::ToJson(config.MakeArchitecture());
  j["dqn"] = model_io::ToJson(config.dqn);
  j["dqn"]["reward_scale"] = config.reward_scale;
  j["run"] = {{"total_episodes", config.total_episodes},
              {"eval_interval", config.eval_interval},
              {"eval_episodes", config.eval_episodes},
              {"seeds", config.seeds}};
  return j;
}

}  // namespace lcdqn
