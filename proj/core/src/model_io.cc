#include "lcdqn/model_io.h"

#include <fstream>
#include <sstream>

#include "lcdqn/errors.h"

namespace lcdqn::model_io {
namespace {

using nlohmann::json;

constexpr const char* kFormatName = "lcdqn-model";

std::string LayoutDescription(const observe::ObservationSpec& spec) {
  if (spec.kind == observe::ObservationKind::kGrid) {
    return "2 x rows x cols channel-major; channel 0 occupancy in {0,1}, "
           "channel 1 (v_i*dir_i - v_ego)/velocity_scale; row = lane index, "
           "col = floor(dx/cell_length) + cols/2; ego cell occupied with "
           "velocity 0; nearest vehicle owns a shared cell";
  }
  return "slot_count triples (dx/position_scale, dy/lateral_scale, "
         "(v_i*dir_i - v_ego)/velocity_scale) sorted by |dx| ascending; "
         "absent slots hold (view_range/position_scale, 0, 0)";
}

template <typename T>
T Field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(std::string("model file: missing field '") + key + "'");
  }
  return j.at(key).get<T>();
}

}  // namespace

json ToJson(const nn::Architecture& arch) {
  json layers = json::array();
  for (const nn::LayerSpec& s : arch.layers) {
    json l = {{"kind", std::string(nn::ToString(s.kind))},
              {"units", s.units},
              {"activation", std::string(nn::ToString(s.activation))}};
    if (s.kind == nn::LayerKind::kConv) {
      l["kernel"] = {s.kernel_h, s.kernel_w};
      l["stride"] = {s.stride_h, s.stride_w};
    }
    layers.push_back(std::move(l));
  }
  return {{"input", {arch.input.channels, arch.input.height, arch.input.width}},
          {"layers", std::move(layers)}};
}

nn::Architecture ArchitectureFromJson(const json& j) {
  try {
    nn::Architecture arch;
    const auto input = j.at("input");
    arch.input = {input.at(0).get<int>(), input.at(1).get<int>(),
                  input.at(2).get<int>()};
    for (const json& l : j.at("layers")) {
      nn::LayerSpec s;
      s.kind = nn::ParseLayerKind(l.at("kind").get<std::string>());
      s.units = l.at("units").get<int>();
      s.activation = nn::ParseActivation(l.at("activation").get<std::string>());
      if (s.kind == nn::LayerKind::kConv) {
        s.kernel_h = l.at("kernel").at(0).get<int>();
        s.kernel_w = l.at("kernel").at(1).get<int>();
        s.stride_h = l.at("stride").at(0).get<int>();
        s.stride_w = l.at("stride").at(1).get<int>();
      }
      arch.layers.push_back(s);
    }
    return arch;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file: bad architecture: ") + e.what());
  }
}

json ToJson(const observe::ObservationSpec& spec) {
  return {{"kind", std::string(observe::ToString(spec.kind))},
          {"view_range", spec.view_range},
          {"position_scale", spec.position_scale},
          {"lateral_scale", spec.lateral_scale},
          {"velocity_scale", spec.velocity_scale},
          {"slot_count", spec.slot_count},
          {"grid_rows", spec.grid_rows},
          {"grid_cols", spec.grid_cols},
          {"cell_length", spec.cell_length},
          {"dimension", spec.Dimension()},
          {"layout", LayoutDescription(spec)}};
}

observe::ObservationSpec ObservationFromJson(const json& j) {
  observe::ObservationSpec spec;
  spec.kind = observe::ParseObservationKind(Field<std::string>(j, "kind"));
  spec.view_range = Field<double>(j, "view_range");
  spec.position_scale = Field<double>(j, "position_scale");
  spec.lateral_scale = Field<double>(j, "lateral_scale");
  spec.velocity_scale = Field<double>(j, "velocity_scale");
  spec.slot_count = Field<int>(j, "slot_count");
  spec.grid_rows = Field<int>(j, "grid_rows");
  spec.grid_cols = Field<int>(j, "grid_cols");
  spec.cell_length = Field<double>(j, "cell_length");
  return spec;
}

json ToJson(const plan::ActionSpace& a) {
  return {{"n_lanes", a.n_lanes},
          {"d_max", a.d_max},
          {"lane_width", a.lane_width},
          {"count", a.Count()}};
}

plan::ActionSpace ActionSpaceFromJson(const json& j) {
  plan::ActionSpace a;
  a.n_lanes = Field<int>(j, "n_lanes");
  a.d_max = Field<int>(j, "d_max");
  a.lane_width = Field<double>(j, "lane_width");
  return a;
}

json ToJson(const env::ScenarioConfig& c) {
  const env::RewardWeights& w = c.reward;
  return {
      {"kind", std::string(env::ToString(c.kind))},
      {"n_non_ego", c.n_non_ego},
      {"n_lanes", c.n_lanes},
      {"lane_width", c.lane_width},
      {"initial_lane", c.initial_lane},
      {"v_ego_init", c.v_ego_init},
      {"v_max", c.v_max},
      {"v_non_limit", c.v_non_limit},
      {"view_range", c.view_range},
      {"initiation_range", c.initiation_range},
      {"dt", c.dt},
      {"max_steps", c.max_steps},
      {"safety_distance", c.safety_distance},
      {"controller_gain", c.controller_gain},
      {"min_spawn_gap", c.min_spawn_gap},
      {"a_min", c.a_min},
      {"a_max", c.a_max},
      {"vehicle_length", c.vehicle_length},
      {"vehicle_width", c.vehicle_width},
      {"completion_margin", c.completion_margin},
      {"lane_tolerance", c.lane_tolerance},
      {"reward",
       {{"w_lat_acc", w.w_lat_acc},
        {"w_speed", w.w_speed},
        {"w_long_acc", w.w_long_acc},
        {"lane_quadratic", w.lane_quadratic},
        {"lane_linear", w.lane_linear},
        {"lane_constant", w.lane_constant},
        {"w_non", w.w_non},
        {"completion_bonus", w.completion_bonus},
        {"collision_penalty", w.collision_penalty}}}};
}

json ToJson(const dqn::DqnConfig& c) {
  return {{"gamma", c.gamma},
          {"batch_size", c.batch_size},
          {"target_sync_interval", c.target_sync_interval},
          {"learning_rate", c.learning_rate},
          {"buffer_capacity", c.buffer_capacity},
          {"train_start_size", c.train_start_size},
          {"train_interval", c.train_interval},
          {"double_dqn", c.double_dqn},
          {"epsilon_start", c.epsilon.start},
          {"epsilon_end", c.epsilon.end},
          {"epsilon_decay_steps", c.epsilon.decay_steps}};
}

json TensorsToJson(const std::vector<Eigen::MatrixXd>& tensors) {
  json out = json::array();
  for (const Eigen::MatrixXd& t : tensors) {
    out.push_back({{"rows", t.rows()},
                   {"cols", t.cols()},
                   {"data", std::vector<double>(t.data(), t.data() + t.size())}});
  }
  return out;
}

std::vector<Eigen::MatrixXd> TensorsFromJson(const json& j) {
  std::vector<Eigen::MatrixXd> tensors;
  for (const json& t : j) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw ConfigError("model file: tensor data length does not match shape");
    }
    tensors.push_back(Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols));
  }
  return tensors;
}

json ModelToJson(const PolicyModel& model) {
  return {{"format", kFormatName},
          {"format_version", kFormatVersion},
          {"fingerprint", model.params.fingerprint},
          {"architecture", ToJson(model.params.arch)},
          {"observation", ToJson(model.observation)},
          {"actions", ToJson(model.actions)},
          {"tensors", TensorsToJson(model.params.tensors)}};
}

PolicyModel ModelFromJson(const json& j) {
  if (!j.is_object() || j.value("format", "") != kFormatName) {
    throw ConfigError("not an lcdqn model file");
  }
  if (j.value("format_version", -1) != kFormatVersion) {
    throw ConfigError("unsupported model format version " +
                      j.value("format_version", json(-1)).dump());
  }
  PolicyModel model;
  const nn::Architecture arch = ArchitectureFromJson(j.at("architecture"));
  model.params = nn::Init(arch, 0);
  const std::string fingerprint = Field<std::string>(j, "fingerprint");
  if (fingerprint != model.params.fingerprint) {
    throw ConfigError("model fingerprint " + fingerprint +
                      " does not match its architecture (" +
                      model.params.fingerprint + ")");
  }
  std::vector<Eigen::MatrixXd> tensors;
  try {
    tensors = TensorsFromJson(j.at("tensors"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file: bad tensors: ") + e.what());
  }
  if (tensors.size() != model.params.tensors.size()) {
    throw ConfigError("model file: wrong number of tensors");
  }
  for (size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].rows() != model.params.tensors[i].rows() ||
        tensors[i].cols() != model.params.tensors[i].cols()) {
      throw ConfigError("model file: tensor " + std::to_string(i) +
                        " has the wrong shape");
    }
  }
  model.params.tensors = std::move(tensors);
  if (!model.params.AllFinite()) {
    throw ConfigError("model file: non-finite parameter values");
  }
  model.observation = ObservationFromJson(j.at("observation"));
  model.actions = ActionSpaceFromJson(j.at("actions"));
  return model;
}

void SaveModel(const PolicyModel& model, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write model file " + path.string());
  os << ModelToJson(model).dump() << '\n';
  if (!os) throw ConfigError("failed writing model file " + path.string());
}

PolicyModel LoadModel(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open model file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("model file " + path.string() + ": " + e.what());
  }
  return ModelFromJson(j);
}

void CheckCompatible(const PolicyModel& model,
                     const observe::ObservationSpec& observation,
                     const plan::ActionSpace& actions) {
  if (!(model.observation == observation)) {
    throw ConfigError("observation schema mismatch: model expects " +
                      ToJson(model.observation).dump() + ", scenario provides " +
                      ToJson(observation).dump());
  }
  if (!(model.actions == actions)) {
    throw ConfigError("action space mismatch: model has " +
                      ToJson(model.actions).dump() + ", scenario provides " +
                      ToJson(actions).dump());
  }
  if (model.params.arch.InputSize() != observation.Dimension() ||
      model.params.arch.OutputSize() != actions.Count()) {
    throw ConfigError("network input/output sizes do not match the schema");
  }
}

}  // namespace lcdqn::model_io
