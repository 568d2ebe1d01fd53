#include "lcdqn/observe.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lcdqn/errors.h"

namespace lcdqn::observe {
namespace {

struct Relative {
  double dx;
  double dy;
  double dv;
};

Relative RelativeTo(const env::VehicleState& ego, const env::VehicleState& o) {
  return {o.x - ego.x, o.y - ego.y, o.v * o.direction - ego.v};
}

ListObservation BuildList(const env::WorldState& world,
                          const ObservationSpec& spec, bool limit_range) {
  if (static_cast<int>(world.others.size()) > spec.slot_count) {
    throw ConfigError("observation has " + std::to_string(spec.slot_count) +
                      " slots but the world holds " +
                      std::to_string(world.others.size()) + " vehicles");
  }
  std::vector<Relative> visible;
  visible.reserve(world.others.size());
  for (const env::VehicleState& o : world.others) {
    const Relative r = RelativeTo(world.ego, o);
    if (limit_range && std::abs(r.dx) > spec.view_range) continue;
    visible.push_back(r);
  }
  std::stable_sort(visible.begin(), visible.end(),
                   [](const Relative& a, const Relative& b) {
                     return std::abs(a.dx) < std::abs(b.dx);
                   });

  ListObservation obs;
  obs.slots.assign(spec.slot_count, Sentinel(spec));
  for (size_t i = 0; i < visible.size(); ++i) {
    obs.slots[i] = {visible[i].dx / spec.position_scale,
                    visible[i].dy / spec.lateral_scale,
                    visible[i].dv / spec.velocity_scale};
  }
  return obs;
}

}  // namespace

std::string_view ToString(ObservationKind kind) {
  switch (kind) {
    case ObservationKind::kFull:
      return "full";
    case ObservationKind::kLimited:
      return "limited";
    case ObservationKind::kGrid:
      return "grid";
  }
  return "unknown";
}

ObservationKind ParseObservationKind(std::string_view name) {
  if (name == "full") return ObservationKind::kFull;
  if (name == "limited") return ObservationKind::kLimited;
  if (name == "grid") return ObservationKind::kGrid;
  throw ConfigError("unknown observation kind '" + std::string(name) +
                    "' (expected full, limited or grid)");
}

void ObservationSpec::Validate() const {
  if (!(view_range > 0.0)) throw ConfigError("observation: d_x must be > 0");
  if (!(position_scale > 0.0 && lateral_scale > 0.0 && velocity_scale > 0.0)) {
    throw ConfigError("observation: normalization scales must be > 0");
  }
  if (kind == ObservationKind::kGrid) {
    if (grid_rows < 1 || grid_cols < 2 || grid_cols % 2 != 0 ||
        !(cell_length > 0.0)) {
      throw ConfigError(
          "observation: grid needs rows >= 1, an even column count and "
          "cell_length > 0");
    }
  } else if (slot_count < 0) {
    throw ConfigError("observation: slot_count must be >= 0");
  }
}

int ObservationSpec::Dimension() const {
  if (kind == ObservationKind::kGrid) return 2 * grid_rows * grid_cols;
  return 3 * slot_count;
}

ObservationSpec MakeObservationSpec(ObservationKind kind,
                                    const env::ScenarioConfig& scenario) {
  ObservationSpec spec;
  spec.kind = kind;
  spec.view_range = scenario.view_range;
  spec.position_scale = scenario.view_range;
  spec.lateral_scale = scenario.n_lanes * scenario.lane_width;
  spec.velocity_scale = scenario.v_max;
  // One sentinel slot keeps an empty road observable.
  spec.slot_count = std::max(1, scenario.n_non_ego);
  spec.grid_rows = scenario.n_lanes;
  spec.grid_cols = 100;
  spec.cell_length = 3.0;
  return spec;
}

std::vector<double> ListObservation::Flatten() const {
  std::vector<double> out;
  out.reserve(3 * slots.size());
  for (const Slot& s : slots) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::vector<double> GridObservation::Flatten() const {
  std::vector<double> out(occupancy);
  out.insert(out.end(), velocity.begin(), velocity.end());
  return out;
}

ListObservation::Slot Sentinel(const ObservationSpec& spec) {
  return {spec.view_range / spec.position_scale, 0.0, 0.0};
}

ListObservation BuildFull(const env::WorldState& world,
                          const ObservationSpec& spec) {
  return BuildList(world, spec, false);
}

ListObservation BuildLimited(const env::WorldState& world,
                             const ObservationSpec& spec) {
  return BuildList(world, spec, true);
}

GridObservation BuildGrid(const env::WorldState& world,
                          const ObservationSpec& spec,
                          const env::ScenarioConfig& scenario) {
  GridObservation g;
  g.rows = spec.grid_rows;
  g.cols = spec.grid_cols;
  g.cell_length = spec.cell_length;
  g.occupancy.assign(g.rows * g.cols, 0.0);
  g.velocity.assign(g.rows * g.cols, 0.0);
  // |dx| of the vehicle currently owning each cell's velocity.
  std::vector<double> owner(g.rows * g.cols,
                            std::numeric_limits<double>::infinity());

  const int center = g.cols / 2;
  auto mark = [&](int row, double dx, double dv) {
    if (row < 0 || row >= g.rows) return;
    const int col = static_cast<int>(std::floor(dx / g.cell_length)) + center;
    if (col < 0 || col >= g.cols) return;
    const int idx = row * g.cols + col;
    g.occupancy[idx] = 1.0;
    if (std::abs(dx) < owner[idx]) {
      owner[idx] = std::abs(dx);
      g.velocity[idx] = dv / spec.velocity_scale;
    }
  };

  mark(scenario.LaneOf(world.ego.y), 0.0, 0.0);
  for (const env::VehicleState& o : world.others) {
    const Relative r = RelativeTo(world.ego, o);
    mark(scenario.LaneOf(o.y), r.dx, r.dv);
  }
  return g;
}

std::vector<double> Encode(const env::WorldState& world,
                           const ObservationSpec& spec,
                           const env::ScenarioConfig& scenario) {
  switch (spec.kind) {
    case ObservationKind::kFull:
      return BuildFull(world, spec).Flatten();
    case ObservationKind::kLimited:
      return BuildLimited(world, spec).Flatten();
    case ObservationKind::kGrid:
      return BuildGrid(world, spec, scenario).Flatten();
  }
  return {};
}

}  // namespace lcdqn::observe
