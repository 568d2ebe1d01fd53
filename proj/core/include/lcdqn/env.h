#ifndef LCDQN_ENV_H_
#define LCDQN_ENV_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lcdqn/rng.h"

// Deterministic 2D kinematic highway simulator.
//
// Coordinates: x runs along the road in the ego's direction of travel, y is
// lateral with lane i centered at lane_width * (i + 0.5). Only the ego moves
// laterally; it tracks a supplied lateral sample perfectly. Every other
// vehicle keeps its spawn lane and is driven by the longitudinal controller.
namespace lcdqn::env {

enum class ScenarioKind { kOvertake, kOncoming };
enum class EpisodeStatus { kRunning, kSuccess, kCollision, kTimeout };

std::string_view ToString(ScenarioKind kind);
std::string_view ToString(EpisodeStatus status);
ScenarioKind ParseScenarioKind(std::string_view name);

struct VehicleState {
  double x = 0.0;  // m
  double y = 0.0;  // m
  double v = 0.0;  // m/s along own direction, >= 0
  double a = 0.0;  // m/s^2, last applied (clamped) command
  int direction = 1;  // +1 ego direction, -1 oncoming
  double length = 5.0;
  double width = 2.0;
  double v_limit = 0.0;

  bool operator==(const VehicleState&) const = default;
};

// Coefficients of the composite per-step reward. Penalty weights are
// magnitudes; signs are applied in ComputeReward.
struct RewardWeights {
  double w_lat_acc = 0.12;
  double w_speed = 2.0;
  double w_long_acc = 1.0;
  double lane_quadratic = 1.375;
  double lane_linear = -6.25;
  double lane_constant = 5.0;
  double w_non = 0.1;
  double completion_bonus = 1000.0;
  double collision_penalty = -1000.0;

  bool operator==(const RewardWeights&) const = default;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kOvertake;
  int n_non_ego = 2;
  int n_lanes = 2;
  double lane_width = 3.5;
  int initial_lane = 0;
  double v_ego_init = 120.0 / 3.6;
  double v_max = 120.0 / 3.6;
  double v_non_limit = 84.0 / 3.6;
  double view_range = 150.0;
  double initiation_range = 300.0;
  double dt = 0.2;
  int max_steps = 350;
  double safety_distance = 30.0;
  double controller_gain = 0.5;
  double min_spawn_gap = 40.0;
  double a_min = -6.0;
  double a_max = 3.0;
  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  double completion_margin = 30.0;
  double lane_tolerance = 0.3;
  RewardWeights reward;

  // Throws ConfigError when an invariant does not hold.
  void Validate() const;

  double LaneCenter(int lane) const { return lane_width * (lane + 0.5); }
  // Index of the nearest lane center, clamped to the road; exact midpoints
  // between two centers resolve to the lower index.
  int LaneOf(double y) const;
  double EpisodeDuration() const { return dt * max_steps; }

  bool operator==(const ScenarioConfig&) const = default;
};

// Lateral state of the ego taken from the active trajectory, as time
// derivatives.
struct LateralSample {
  double y = 0.0;
  double y_dot = 0.0;
  double y_ddot = 0.0;

  bool operator==(const LateralSample&) const = default;
};

struct WorldState {
  VehicleState ego;
  std::vector<VehicleState> others;
  LateralSample ego_lateral;
  int step_index = 0;
  EpisodeStatus status = EpisodeStatus::kRunning;
  double initial_lane_center = 0.0;
  Rng rng;

  bool operator==(const WorldState&) const = default;
};

struct StepOutcome {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double terminal_bonus = 0.0;
  double total = 0.0;
  bool terminal = false;
  EpisodeStatus reason = EpisodeStatus::kRunning;  // kRunning means none
};

// Fresh episode. Identical (config, seed) pairs yield identical states.
WorldState Reset(const ScenarioConfig& config, std::uint64_t seed);

// Ego position and speed after one step under `accel`, without mutating the
// world. Step uses the same integration, so a trajectory can be sampled at
// the returned x before stepping.
struct EgoPrediction {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
};
EgoPrediction PredictEgo(const VehicleState& ego, const ScenarioConfig& config,
                         double accel);

// Advances the world by one dt and reports the reward. Throws UsageError if
// the episode has already terminated.
StepOutcome Step(WorldState& world, const ScenarioConfig& config,
                 const LateralSample& ego_lateral, double ego_accel);

bool CollisionCheck(const WorldState& world);
bool Overlaps(const VehicleState& a, const VehicleState& b);
bool SuccessCheck(const WorldState& world, const ScenarioConfig& config);

// Distance from y to the nearest lane center.
double LateralLaneOffset(double y, const ScenarioConfig& config);
double LaneKeepingReward(double lateral_offset, const RewardWeights& weights);

// Reward for the state reached by a step; `reason` selects the terminal term.
StepOutcome ComputeReward(const WorldState& curr, const ScenarioConfig& config,
                          EpisodeStatus reason);

}  // namespace lcdqn::env

#endif  // LCDQN_ENV_H_
