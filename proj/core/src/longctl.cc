#include "lcdqn/longctl.h"

#include <algorithm>
#include <limits>

#include "lcdqn/errors.h"

namespace lcdqn::longctl {

GapMeasurement FrontVehicle(const env::WorldState& world,
                            const env::ScenarioConfig& config, int subject) {
  const int n = static_cast<int>(world.others.size());
  if (subject < -1 || subject >= n) {
    throw UsageError("FrontVehicle: subject index out of range");
  }
  const env::VehicleState& self =
      subject < 0 ? world.ego : world.others[subject];
  const int lane = config.LaneOf(self.y);

  GapMeasurement best;
  double best_ahead = std::numeric_limits<double>::infinity();
  auto consider = [&](const env::VehicleState& other) {
    if (other.direction != self.direction) return;
    if (config.LaneOf(other.y) != lane) return;
    const double ahead = self.direction * (other.x - self.x);
    if (ahead <= 0.0 || ahead >= best_ahead) return;
    best_ahead = ahead;
    best.has_front = true;
    best.v_front = other.v;
    best.dist = std::max(0.0, ahead - 0.5 * (self.length + other.length));
  };
  if (subject >= 0) consider(world.ego);
  for (int i = 0; i < n; ++i) {
    if (i != subject) consider(world.others[i]);
  }
  return best;
}

double AccelCommand(double v, const GapMeasurement& gap,
                    const ControllerParams& params, double v_target) {
  const double alpha = params.alpha;
  double acc;
  if (gap.has_front) {
    acc = alpha * (gap.v_front - v) +
          0.25 * alpha * alpha * (gap.dist - params.safety_distance);
  } else {
    acc = alpha * (v_target - v);
  }
  return std::clamp(acc, params.a_min, params.a_max);
}

}  // namespace lcdqn::longctl
