#include "lcdqn/env.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcdqn/errors.h"
#include "lcdqn/longctl.h"

namespace lcdqn::env {
namespace {

int PassingLane(const ScenarioConfig& config) {
  return config.initial_lane + 1 < config.n_lanes ? config.initial_lane + 1
                                                  : config.initial_lane - 1;
}

int SameDirectionCount(const ScenarioConfig& config) {
  if (config.kind == ScenarioKind::kOvertake) return config.n_non_ego;
  return (config.n_non_ego + 1) / 2;
}

// Draws `count` longitudinal offsets in [gap, range] with pairwise spacing of
// at least `gap`, uniformly over the feasible set: sorted uniforms on the
// slack interval, shifted by multiples of the gap.
std::vector<double> SpawnOffsets(Rng& rng, int count, double range,
                                 double gap) {
  const double slack = range - count * gap;
  std::vector<double> u(count);
  for (double& value : u) value = UniformReal(rng, 0.0, slack);
  std::sort(u.begin(), u.end());
  for (int i = 0; i < count; ++i) u[i] += (i + 1) * gap;
  return u;
}

VehicleState MakeVehicle(const ScenarioConfig& config, double x, double y,
                         double v, int direction, double v_limit) {
  VehicleState s;
  s.x = x;
  s.y = y;
  s.v = v;
  s.a = 0.0;
  s.direction = direction;
  s.length = config.vehicle_length;
  s.width = config.vehicle_width;
  s.v_limit = v_limit;
  return s;
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid scenario: " + what);
}

}  // namespace

std::string_view ToString(ScenarioKind kind) {
  return kind == ScenarioKind::kOvertake ? "overtake" : "oncoming";
}

std::string_view ToString(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::kRunning:
      return "running";
    case EpisodeStatus::kSuccess:
      return "success";
    case EpisodeStatus::kCollision:
      return "collision";
    case EpisodeStatus::kTimeout:
      return "timeout";
  }
  return "unknown";
}

ScenarioKind ParseScenarioKind(std::string_view name) {
  if (name == "overtake") return ScenarioKind::kOvertake;
  if (name == "oncoming") return ScenarioKind::kOncoming;
  throw ConfigError("unknown scenario kind '" + std::string(name) +
                    "' (expected overtake or oncoming)");
}

void ScenarioConfig::Validate() const {
  Require(n_lanes >= 2, "n_lanes must be >= 2");
  Require(lane_width > 0.0, "lane_width must be > 0");
  Require(initial_lane >= 0 && initial_lane < n_lanes,
          "initial_lane must index an existing lane");
  Require(n_non_ego >= 0, "n_non_ego must be >= 0");
  Require(v_max > 0.0, "v_max must be > 0");
  Require(v_ego_init >= 0.0 && v_ego_init <= v_max,
          "v_ego_init must lie in [0, v_max]");
  Require(v_non_limit > 0.0, "v_non_limit must be > 0");
  Require(view_range > 0.0, "view_range must be > 0");
  Require(initiation_range > 0.0, "initiation_range must be > 0");
  Require(dt > 0.0, "dt must be > 0");
  Require(max_steps >= 1, "max_steps must be >= 1");
  Require(safety_distance > 0.0, "safety_distance must be > 0");
  Require(controller_gain > 0.0, "controller_gain must be > 0");
  Require(a_min < 0.0 && a_max > 0.0, "require a_min < 0 < a_max");
  Require(vehicle_length > 0.0 && vehicle_width > 0.0,
          "vehicle dimensions must be > 0");
  Require(min_spawn_gap >= vehicle_length,
          "min_spawn_gap must be >= vehicle_length");
  Require(completion_margin >= 0.0, "completion_margin must be >= 0");
  Require(lane_tolerance >= 0.0, "lane_tolerance must be >= 0");
  Require(reward.w_lat_acc >= 0.0 && reward.w_speed >= 0.0 &&
              reward.w_long_acc >= 0.0 && reward.w_non >= 0.0,
          "reward penalty weights must be >= 0");
  Require(reward.completion_bonus >= 0.0, "completion_bonus must be >= 0");
  Require(reward.collision_penalty <= 0.0, "collision_penalty must be <= 0");

  const int same = SameDirectionCount(*this);
  const int oncoming = n_non_ego - same;
  Require(initiation_range >= same * min_spawn_gap,
          "initiation_range too small for n_non_ego * min_spawn_gap");
  Require(2.0 * initiation_range >= oncoming * min_spawn_gap,
          "2 * initiation_range too small for the oncoming vehicles");
}

int ScenarioConfig::LaneOf(double y) const {
  const int lane = static_cast<int>(std::ceil(y / lane_width - 1.0));
  return std::clamp(lane, 0, n_lanes - 1);
}

WorldState Reset(const ScenarioConfig& config, std::uint64_t seed) {
  config.Validate();
  WorldState world;
  world.rng.seed(seed);
  world.initial_lane_center = config.LaneCenter(config.initial_lane);
  world.ego = MakeVehicle(config, 0.0, world.initial_lane_center,
                          config.v_ego_init, 1, config.v_max);
  world.ego_lateral = {world.initial_lane_center, 0.0, 0.0};

  const int same = SameDirectionCount(config);
  for (double x : SpawnOffsets(world.rng, same, config.initiation_range,
                               config.min_spawn_gap)) {
    world.others.push_back(MakeVehicle(config, x, world.initial_lane_center,
                                       config.v_non_limit, 1,
                                       config.v_non_limit));
  }
  const int oncoming = config.n_non_ego - same;
  if (oncoming > 0) {
    const double y = config.LaneCenter(PassingLane(config));
    for (double x : SpawnOffsets(world.rng, oncoming,
                                 2.0 * config.initiation_range,
                                 config.min_spawn_gap)) {
      world.others.push_back(
          MakeVehicle(config, x, y, config.v_non_limit, -1, config.v_non_limit));
    }
  }
  return world;
}

EgoPrediction PredictEgo(const VehicleState& ego, const ScenarioConfig& config,
                         double accel) {
  EgoPrediction p;
  p.a = std::clamp(accel, config.a_min, config.a_max);
  p.v = std::clamp(ego.v + p.a * config.dt, 0.0, config.v_max);
  p.x = ego.x + 0.5 * (ego.v + p.v) * config.dt;
  return p;
}

StepOutcome Step(WorldState& world, const ScenarioConfig& config,
                 const LateralSample& ego_lateral, double ego_accel) {
  if (world.status != EpisodeStatus::kRunning) {
    throw UsageError("Step called on a terminated episode");
  }
  const auto params = longctl::ControllerParams::FromScenario(config);
  const int n = static_cast<int>(world.others.size());

  // All non-ego commands are computed from the pre-step state.
  std::vector<double> accel(n);
  for (int i = 0; i < n; ++i) {
    const auto gap = longctl::FrontVehicle(world, config, i);
    accel[i] = longctl::AccelCommand(world.others[i].v, gap, params,
                                     world.others[i].v_limit);
  }
  for (int i = 0; i < n; ++i) {
    VehicleState& s = world.others[i];
    const double v_new = std::clamp(s.v + accel[i] * config.dt, 0.0, s.v_limit);
    s.x += s.direction * 0.5 * (s.v + v_new) * config.dt;
    s.v = v_new;
    s.a = accel[i];
  }

  const EgoPrediction ego = PredictEgo(world.ego, config, ego_accel);
  world.ego.x = ego.x;
  world.ego.v = ego.v;
  world.ego.a = ego.a;
  world.ego.y = ego_lateral.y;
  world.ego_lateral = ego_lateral;
  ++world.step_index;

  EpisodeStatus reason = EpisodeStatus::kRunning;
  if (CollisionCheck(world)) {
    reason = EpisodeStatus::kCollision;
  } else if (SuccessCheck(world, config)) {
    reason = EpisodeStatus::kSuccess;
  } else if (world.step_index >= config.max_steps) {
    reason = EpisodeStatus::kTimeout;
  }
  world.status = reason;
  return ComputeReward(world, config, reason);
}

bool Overlaps(const VehicleState& a, const VehicleState& b) {
  return std::abs(a.x - b.x) < 0.5 * (a.length + b.length) &&
         std::abs(a.y - b.y) < 0.5 * (a.width + b.width);
}

bool CollisionCheck(const WorldState& world) {
  return std::any_of(world.others.begin(), world.others.end(),
                     [&](const VehicleState& o) { return Overlaps(world.ego, o); });
}

bool SuccessCheck(const WorldState& world, const ScenarioConfig& config) {
  for (const VehicleState& o : world.others) {
    if (o.direction != world.ego.direction) continue;
    if (world.ego.x - o.x < config.completion_margin) return false;
  }
  return std::abs(world.ego.y - world.initial_lane_center) <=
         config.lane_tolerance;
}

double LateralLaneOffset(double y, const ScenarioConfig& config) {
  return std::abs(y - config.LaneCenter(config.LaneOf(y)));
}

double LaneKeepingReward(double d, const RewardWeights& w) {
  return w.lane_quadratic * d * d + w.lane_linear * d + w.lane_constant;
}

StepOutcome ComputeReward(const WorldState& curr, const ScenarioConfig& config,
                          EpisodeStatus reason) {
  const RewardWeights& w = config.reward;
  StepOutcome out;
  const double lat_acc = curr.ego_lateral.y_ddot;
  const double long_acc = curr.ego.a;
  out.r1 = -w.w_lat_acc * lat_acc * lat_acc -
           w.w_speed * (config.v_max - curr.ego.v) -
           w.w_long_acc * long_acc * long_acc;
  out.r2 = LaneKeepingReward(LateralLaneOffset(curr.ego.y, config), w);

  double sum = 0.0;
  int count = 0;
  for (const VehicleState& o : curr.others) {
    if (o.direction != curr.ego.direction) continue;
    const double slowdown = o.v_limit - o.v;
    sum += slowdown * slowdown;
    ++count;
  }
  out.r3 = count > 0 ? -w.w_non * (sum / count) : 0.0;

  if (reason == EpisodeStatus::kSuccess) {
    out.terminal_bonus = w.completion_bonus;
  } else if (reason == EpisodeStatus::kCollision) {
    out.terminal_bonus = w.collision_penalty;
  }
  out.total = out.r1 + out.r2 + out.r3 + out.terminal_bonus;
  out.terminal = reason != EpisodeStatus::kRunning;
  out.reason = reason;
  return out;
}

}  // namespace lcdqn::env
