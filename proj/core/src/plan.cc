#include "lcdqn/plan.h"

#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "lcdqn/errors.h"

namespace lcdqn::plan {
namespace {

// Gram matrix of the second derivatives of the normalized monomials:
// H(j, k) = integral_0^1 j(j-1) k(k-1) s^(j+k-4) ds.
Eigen::MatrixXd SecondDerivativeGram(int degree) {
  const int n = degree + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 2; j < n; ++j) {
    for (int k = 2; k < n; ++k) {
      h(j, k) = static_cast<double>(j * (j - 1) * k * (k - 1)) / (j + k - 3);
    }
  }
  return h;
}

void CheckHorizon(double horizon, double min_horizon) {
  if (!(horizon >= min_horizon)) {
    throw NumericalError("trajectory horizon " + std::to_string(horizon) +
                         " m is shorter than the minimum " +
                         std::to_string(min_horizon) + " m");
  }
}

}  // namespace

int ActionCount(int n_lanes, int d_max) { return n_lanes * d_max; }

ActionSpec DecodeAction(int action, int d_max, int n_lanes, double lane_width) {
  if (d_max < 1 || n_lanes < 1) {
    throw UsageError("DecodeAction: d_max and n_lanes must be >= 1");
  }
  if (action < 0 || action >= ActionCount(n_lanes, d_max)) {
    throw UsageError("action " + std::to_string(action) + " outside [0, " +
                     std::to_string(ActionCount(n_lanes, d_max)) + ")");
  }
  ActionSpec spec;
  spec.lane_index = action / d_max;
  spec.lane_center = spec.lane_index * lane_width + 0.5 * lane_width;
  spec.distance_factor = action % d_max + 1;
  return spec;
}

int EncodeAction(int lane_index, int distance_factor, int d_max) {
  return lane_index * d_max + (distance_factor - 1);
}

Endpoints MakeTarget(const ActionSpec& action, const env::VehicleState& ego) {
  if (!(ego.v > 0.0)) {
    throw NumericalError("degenerate horizon: ego speed is zero");
  }
  return {{ego.x, ego.y},
          {ego.x + ego.v * action.distance_factor, action.lane_center}};
}

Trajectory::Trajectory(std::array<double, 6> coefficients, double x0,
                       double x_end)
    : coeffs_(coefficients), x0_(x0), x_end_(x_end) {
  if (!(x_end > x0)) throw UsageError("trajectory requires x_end > x0");
}

LateralPoint Trajectory::Sample(double x) const {
  if (x < x0_) throw UsageError("trajectory sampled before its start");
  if (x >= x_end_) {
    double y = 0.0;
    for (double c : coeffs_) y += c;
    return {y, 0.0, 0.0};
  }
  return EvaluateNormalized({coeffs_.begin(), coeffs_.end()}, x0_, horizon(),
                            x);
}

env::LateralSample Trajectory::SampleLateral(double x, double v) const {
  const LateralPoint p = Sample(x);
  return {p.y, p.dy * v, p.ddy * v * v};
}

Trajectory FitQuintic(const Point& start, const Point& target,
                      const Derivatives& start_derivs, double min_horizon) {
  const double length = target.x - start.x;
  CheckHorizon(length, min_horizon);
  const double p0 = start_derivs.dy * length;
  const double a0 = start_derivs.ddy * length * length;
  const double delta = target.y - start.y;
  return Trajectory({start.y, p0, 0.5 * a0,
                     10.0 * delta - 6.0 * p0 - 1.5 * a0,
                     -15.0 * delta + 8.0 * p0 + 1.5 * a0,
                     6.0 * delta - 3.0 * p0 - 0.5 * a0},
                    start.x, target.x);
}

Trajectory HoldLane(double x0, double y) {
  return Trajectory({y, 0.0, 0.0, 0.0, 0.0, 0.0}, x0, x0 + kMinHorizon);
}

std::vector<double> FitPolynomialQp(const Point& start, const Point& target,
                                    const Derivatives& start_derivs,
                                    int degree) {
  if (degree < 5) throw UsageError("FitPolynomialQp: degree must be >= 5");
  const double length = target.x - start.x;
  CheckHorizon(length, 0.0);
  const int n = degree + 1;
  const int m = 6;

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = 2.0 * SecondDerivativeGram(degree);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  for (int k = 0; k < n; ++k) {
    a(3, k) = 1.0;
    a(4, k) = k;
    a(5, k) = static_cast<double>(k) * (k - 1);
  }
  Eigen::VectorXd b(m);
  b << start.y, start_derivs.dy * length, start_derivs.ddy * length * length,
      target.y, 0.0, 0.0;

  kkt.topRightCorner(n, m) = a.transpose();
  kkt.bottomLeftCorner(m, n) = a;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.tail(m) = b;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(kkt);
    const auto& sv = svd.singularValues();
    throw NumericalError("singular KKT system (condition estimate " +
                         std::to_string(sv(0) / sv(sv.size() - 1)) + ")");
  }
  const Eigen::VectorXd solution = lu.solve(rhs);
  return {solution.data(), solution.data() + n};
}

double CurvatureIntegral(const std::vector<double>& coefficients,
                         double horizon) {
  const int degree = static_cast<int>(coefficients.size()) - 1;
  if (degree < 2) return 0.0;
  const Eigen::Map<const Eigen::VectorXd> c(coefficients.data(),
                                            coefficients.size());
  const double normalized = c.dot(SecondDerivativeGram(degree) * c);
  return normalized / (horizon * horizon * horizon);
}

double CurvatureIntegral(const Trajectory& traj) {
  const auto& c = traj.coefficients();
  return CurvatureIntegral({c.begin(), c.end()}, traj.horizon());
}

LateralPoint EvaluateNormalized(const std::vector<double>& coefficients,
                                double x0, double horizon, double x) {
  const double s = (x - x0) / horizon;
  double y = 0.0, ys = 0.0, yss = 0.0;
  // Horner on the polynomial and its first two derivatives.
  for (int k = static_cast<int>(coefficients.size()) - 1; k >= 0; --k) {
    yss = yss * s + 2.0 * ys;
    ys = ys * s + y;
    y = y * s + coefficients[k];
  }
  return {y, ys / horizon, yss / (horizon * horizon)};
}

void WriteTrajectoryCsv(const Trajectory& traj, double step, std::ostream& os) {
  if (!(step > 0.0)) throw UsageError("sampling step must be > 0");
  os << "x,y,dy,ddy\n";
  const int count = static_cast<int>(std::floor(traj.horizon() / step + 1e-9));
  os.precision(17);
  for (int i = 0; i <= count; ++i) {
    const double x = traj.x0() + i * step;
    const LateralPoint p = traj.Sample(x);
    os << x << ',' << p.y << ',' << p.dy << ',' << p.ddy << '\n';
  }
}

}  // namespace lcdqn::plan
