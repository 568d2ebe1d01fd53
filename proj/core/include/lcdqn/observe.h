#ifndef LCDQN_OBSERVE_H_
#define LCDQN_OBSERVE_H_

#include <array>
#include <string_view>
#include <vector>

#include "lcdqn/env.h"

// Observation encodings fed to the policy network. All three are relative to
// the ego: neither the ego's absolute position nor its speed is exposed.
namespace lcdqn::observe {

enum class ObservationKind { kFull, kLimited, kGrid };

std::string_view ToString(ObservationKind kind);
ObservationKind ParseObservationKind(std::string_view name);

struct ObservationSpec {
  ObservationKind kind = ObservationKind::kLimited;
  double view_range = 150.0;       // d_x, m
  double position_scale = 150.0;   // divides dx
  double lateral_scale = 7.0;      // divides dy
  double velocity_scale = 120.0 / 3.6;  // divides dv
  int slot_count = 2;
  int grid_rows = 2;
  int grid_cols = 100;
  double cell_length = 3.0;

  void Validate() const;
  // Flattened length of the encoding.
  int Dimension() const;

  bool operator==(const ObservationSpec&) const = default;
};

// Defaults derived from the scenario: positions scale by the view range,
// lateral offsets by the road width, speeds by v_max; one slot per non-ego
// vehicle, one grid row per lane.
ObservationSpec MakeObservationSpec(ObservationKind kind,
                                    const env::ScenarioConfig& scenario);

struct ListObservation {
  using Slot = std::array<double, 3>;  // (dx, dy, dv), normalized
  std::vector<Slot> slots;

  std::vector<double> Flatten() const;
};

// Two layers over lanes x longitudinal cells, row-major per layer.
struct GridObservation {
  int rows = 0;
  int cols = 0;
  double cell_length = 0.0;
  std::vector<double> occupancy;
  std::vector<double> velocity;

  double Occupancy(int row, int col) const { return occupancy[row * cols + col]; }
  double Velocity(int row, int col) const { return velocity[row * cols + col]; }
  // Occupancy layer followed by velocity layer, i.e. a (2, rows, cols)
  // channel-major tensor.
  std::vector<double> Flatten() const;
};

ListObservation::Slot Sentinel(const ObservationSpec& spec);

ListObservation BuildFull(const env::WorldState& world,
                          const ObservationSpec& spec);
ListObservation BuildLimited(const env::WorldState& world,
                             const ObservationSpec& spec);
GridObservation BuildGrid(const env::WorldState& world,
                          const ObservationSpec& spec,
                          const env::ScenarioConfig& scenario);

// Dispatches on spec.kind and flattens.
std::vector<double> Encode(const env::WorldState& world,
                           const ObservationSpec& spec,
                           const env::ScenarioConfig& scenario);

}  // namespace lcdqn::observe

#endif  // LCDQN_OBSERVE_H_
