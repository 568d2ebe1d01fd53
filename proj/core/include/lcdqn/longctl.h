#ifndef LCDQN_LONGCTL_H_
#define LCDQN_LONGCTL_H_

#include "lcdqn/env.h"

namespace lcdqn::longctl {

struct GapMeasurement {
  double v_front = 0.0;  // m/s along the subject's direction
  double dist = 0.0;     // bumper-to-bumper gap, m
  bool has_front = false;
};

struct ControllerParams {
  double alpha = 0.5;             // 1/s
  double safety_distance = 30.0;  // m
  double a_min = -6.0;
  double a_max = 3.0;

  static ControllerParams FromScenario(const env::ScenarioConfig& config) {
    return {config.controller_gain, config.safety_distance, config.a_min,
            config.a_max};
  }
};

// Subject index -1 selects the ego, otherwise world.others[subject].
// The leader is the nearest vehicle ahead travelling in the same direction
// whose nearest lane matches the subject's.
GapMeasurement FrontVehicle(const env::WorldState& world,
                            const env::ScenarioConfig& config, int subject);

// Car-following law
//   acc = alpha (v_front - v) + alpha^2 / 4 (dist - d_s)
// with a free-road fallback acc = alpha (v_target - v), clamped to
// [a_min, a_max]. The closed loop has a double pole at -alpha/2.
double AccelCommand(double v, const GapMeasurement& gap,
                    const ControllerParams& params, double v_target);

}  // namespace lcdqn::longctl

#endif  // LCDQN_LONGCTL_H_
