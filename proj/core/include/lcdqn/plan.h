#ifndef LCDQN_PLAN_H_
#define LCDQN_PLAN_H_

#include <array>
#include <iosfwd>
#include <vector>

#include "lcdqn/env.h"

// Lateral lane-change planning: discrete actions decode to a target lane and
// a distance factor, which fix the end point of a quintic y(x).
namespace lcdqn::plan {

struct ActionSpec {
  int lane_index = 0;
  double lane_center = 0.0;  // m
  int distance_factor = 1;   // in [1, d_max]

  bool operator==(const ActionSpec&) const = default;
};

struct ActionSpace {
  int n_lanes = 2;
  int d_max = 3;
  double lane_width = 3.5;

  int Count() const { return n_lanes * d_max; }
  bool operator==(const ActionSpace&) const = default;
};

// Action count is lanes * d_max; the lane is a / d_max (floor), the factor
// a % d_max + 1.
int ActionCount(int n_lanes, int d_max);
ActionSpec DecodeAction(int action, int d_max, int n_lanes, double lane_width);
int EncodeAction(int lane_index, int distance_factor, int d_max);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Endpoints {
  Point start;
  Point target;
};

// Start at the ego, target v_ego * d metres ahead on the chosen lane center.
// Throws NumericalError when the ego is stopped.
Endpoints MakeTarget(const ActionSpec& action, const env::VehicleState& ego);

// Spatial derivatives dy/dx and d2y/dx2.
struct Derivatives {
  double dy = 0.0;
  double ddy = 0.0;
};

struct LateralPoint {
  double y = 0.0;
  double dy = 0.0;
  double ddy = 0.0;
};

inline constexpr double kMinHorizon = 5.0;

// Degree-5 lateral path over [x0, xT]. Coefficients are stored in the
// normalized variable s = (x - x0) / (xT - x0), i.e. y = sum_k c_k s^k.
class Trajectory {
 public:
  Trajectory(std::array<double, 6> coefficients, double x0, double x_end);

  const std::array<double, 6>& coefficients() const { return coeffs_; }
  double x0() const { return x0_; }
  double x_end() const { return x_end_; }
  double horizon() const { return x_end_ - x0_; }

  // y, y', y'' in x units. Beyond x_end the end point is held with zero
  // derivatives. Throws UsageError for x < x0.
  LateralPoint Sample(double x) const;

  // Lateral time derivatives at speed v, using ydot = y' v and the
  // curvature-dominated approximation yddot ~ y'' v^2.
  env::LateralSample SampleLateral(double x, double v) const;

 private:
  std::array<double, 6> coeffs_;
  double x0_;
  double x_end_;
};

// The unique quintic through (start, start_derivs) and (target, 0, 0).
// Throws NumericalError when the horizon is shorter than min_horizon.
Trajectory FitQuintic(const Point& start, const Point& target,
                      const Derivatives& start_derivs,
                      double min_horizon = kMinHorizon);

// Flat path holding y from x0 onward.
Trajectory HoldLane(double x0, double y);

// Minimizes the integral of y''^2 over polynomials of the given degree (>= 5)
// subject to the same six boundary conditions, by solving the KKT system in
// the normalized monomial basis. Returns degree + 1 normalized coefficients.
// Throws NumericalError if the KKT matrix is singular.
std::vector<double> FitPolynomialQp(const Point& start, const Point& target,
                                    const Derivatives& start_derivs,
                                    int degree);

// Integral of y''(x)^2 dx over [x0, x0 + horizon] for normalized coefficients.
double CurvatureIntegral(const std::vector<double>& coefficients,
                         double horizon);
double CurvatureIntegral(const Trajectory& traj);

// Polynomial value and first two x-derivatives for normalized coefficients.
LateralPoint EvaluateNormalized(const std::vector<double>& coefficients,
                                double x0, double horizon, double x);

// CSV with header x,y,dy,ddy sampled every `step` metres over the horizon.
void WriteTrajectoryCsv(const Trajectory& traj, double step, std::ostream& os);

}  // namespace lcdqn::plan

#endif  // LCDQN_PLAN_H_
