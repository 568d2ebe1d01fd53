#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "lcdqn/errors.h"
#include "lcdqn/plan.h"
#include "lcdqn/rng.h"
#include "test_util.h"

namespace lcdqn::plan {
namespace {

TEST(DecodeActionTest, SpotValues) {
  const ActionSpec a0 = DecodeAction(0, 3, 2, 3.5);
  EXPECT_EQ(a0.lane_index, 0);
  EXPECT_DOUBLE_EQ(a0.lane_center, 1.75);
  EXPECT_EQ(a0.distance_factor, 1);
  const ActionSpec a5 = DecodeAction(5, 3, 2, 3.5);
  EXPECT_EQ(a5.lane_index, 1);
  EXPECT_DOUBLE_EQ(a5.lane_center, 5.25);
  EXPECT_EQ(a5.distance_factor, 3);
}

TEST(DecodeActionTest, Bijection) {
  std::set<std::pair<int, int>> seen;
  for (int a = 0; a < 6; ++a) {
    const ActionSpec s = DecodeAction(a, 3, 2, 3.5);
    seen.insert({s.lane_index, s.distance_factor});
    EXPECT_EQ(EncodeAction(s.lane_index, s.distance_factor, 3), a);
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(DecodeActionTest, OutOfRange) {
  EXPECT_THROW(DecodeAction(6, 3, 2, 3.5), UsageError);
  EXPECT_THROW(DecodeAction(-1, 3, 2, 3.5), UsageError);
}

TEST(MakeTargetTest, OffsetScalesWithDistanceFactor) {
  const env::VehicleState ego = testing::Vehicle(10.0, 1.75, 100.0 / 3.0);
  const Endpoints e3 = MakeTarget(DecodeAction(5, 3, 2, 3.5), ego);
  EXPECT_NEAR(e3.target.x - e3.start.x, 100.0, 1e-9);
  EXPECT_DOUBLE_EQ(e3.target.y, 5.25);
  const Endpoints e1 = MakeTarget(DecodeAction(3, 3, 2, 3.5), ego);
  EXPECT_NEAR(e1.target.x - e1.start.x, 100.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(e1.start.y, 1.75);
}

TEST(MakeTargetTest, StationaryEgoIsRejected) {
  EXPECT_THROW(MakeTarget(DecodeAction(0, 3, 2, 3.5), testing::Vehicle(0, 1.75, 0.0)),
               NumericalError);
}

TEST(FitQuinticTest, MidpointSymmetry) {
  const Trajectory t = FitQuintic({0, 0}, {100, 3.5}, {});
  EXPECT_NEAR(t.Sample(50).y, 1.75, 1e-12);
}

TEST(FitQuinticTest, FlatWhenNoDisplacement) {
  const Trajectory t = FitQuintic({0, 1.75}, {100, 1.75}, {});
  for (int k = 1; k < 6; ++k) EXPECT_EQ(t.coefficients()[k], 0.0);
  EXPECT_EQ(CurvatureIntegral(t), 0.0);
}

TEST(FitQuinticTest, BoundaryResiduals) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Point s{UniformReal(rng, -100, 100), UniformReal(rng, 0, 7)};
    const Point e{s.x + UniformReal(rng, 5, 200), UniformReal(rng, 0, 7)};
    const Derivatives d{UniformReal(rng, -0.2, 0.2), UniformReal(rng, -0.02, 0.02)};
    const Trajectory t = FitQuintic(s, e, d);
    const LateralPoint a = t.Sample(s.x);
    const LateralPoint b = t.Sample(e.x);
    EXPECT_NEAR(a.y, s.y, 1e-9);
    EXPECT_NEAR(a.dy, d.dy, 1e-9);
    EXPECT_NEAR(a.ddy, d.ddy, 1e-9);
    EXPECT_NEAR(b.y, e.y, 1e-9);
    EXPECT_NEAR(b.dy, 0.0, 1e-9);
    EXPECT_NEAR(b.ddy, 0.0, 1e-9);
  }
}

TEST(FitQuinticTest, ShortHorizonRejected) {
  EXPECT_THROW(FitQuintic({0, 0}, {4.9, 3.5}, {}), NumericalError);
  EXPECT_NO_THROW(FitQuintic({0, 0}, {5.0, 3.5}, {}));
}

TEST(TrajectoryTest, SamplingConventions) {
  const Trajectory t = FitQuintic({10, 1.75}, {60, 5.25}, {0.01, 0.001});
  EXPECT_THROW(t.Sample(9.99), UsageError);
  const LateralPoint beyond = t.Sample(500);
  EXPECT_EQ(beyond.y, 5.25);
  EXPECT_EQ(beyond.dy, 0.0);
  EXPECT_EQ(beyond.ddy, 0.0);
  const LateralPoint start = t.Sample(10);
  EXPECT_NEAR(start.dy, 0.01, 1e-15);
}

TEST(TrajectoryTest, LateralTimeDerivatives) {
  const Trajectory t = FitQuintic({0, 0}, {100, 3.5}, {});
  const LateralPoint p = t.Sample(30);
  const env::LateralSample s = t.SampleLateral(30, 20.0);
  EXPECT_DOUBLE_EQ(s.y, p.y);
  EXPECT_DOUBLE_EQ(s.y_dot, p.dy * 20.0);
  EXPECT_DOUBLE_EQ(s.y_ddot, p.ddy * 400.0);
}

TEST(HoldLaneTest, Flat) {
  const Trajectory t = HoldLane(5.0, 1.75);
  EXPECT_EQ(t.Sample(5.0).y, 1.75);
  EXPECT_EQ(t.Sample(1000.0).y, 1.75);
  EXPECT_EQ(CurvatureIntegral(t), 0.0);
}

TEST(QpTest, DegreeFiveMatchesQuintic) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Point s{0, UniformReal(rng, 0, 7)};
    const Point e{UniformReal(rng, 5, 200), UniformReal(rng, 0, 7)};
    const Derivatives d{UniformReal(rng, -0.2, 0.2), UniformReal(rng, -0.02, 0.02)};
    const auto qp = FitPolynomialQp(s, e, d, 5);
    const Trajectory t = FitQuintic(s, e, d);
    ASSERT_EQ(qp.size(), 6u);
    for (int k = 0; k < 6; ++k) {
      EXPECT_NEAR(qp[k], t.coefficients()[k],
                  1e-9 * std::max(1.0, std::abs(t.coefficients()[k])));
    }
  }
}

TEST(QpTest, HigherDegreeNeverWorse) {
  const Trajectory t = FitQuintic({0, 0}, {100, 3.5}, {});
  const auto qp = FitPolynomialQp({0, 0}, {100, 3.5}, {}, 7);
  ASSERT_EQ(qp.size(), 8u);
  EXPECT_LE(CurvatureIntegral(qp, 100.0), CurvatureIntegral(t) * (1 + 1e-12));
  const LateralPoint end = EvaluateNormalized(qp, 0.0, 100.0, 100.0);
  EXPECT_NEAR(end.y, 3.5, 1e-9);
  EXPECT_NEAR(end.dy, 0.0, 1e-9);
}

TEST(QpTest, RejectsLowDegree) {
  EXPECT_THROW(FitPolynomialQp({0, 0}, {100, 3.5}, {}, 4), std::exception);
}

TEST(CurvatureTest, MatchesNumericalQuadrature) {
  const Trajectory t = FitQuintic({0, 0}, {80, 3.5}, {0.02, 0.0});
  const int n = 20000;
  const double h = 80.0 / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ddy = t.Sample((i + 0.5) * h).ddy;
    sum += ddy * ddy * h;
  }
  EXPECT_NEAR(CurvatureIntegral(t), sum, 1e-7 * sum);
}

TEST(CurvatureTest, PeakLateralAccelerationFallsWithDistanceFactor) {
  const double v = 100.0 / 3.0;
  double previous = 1e300;
  for (int d = 1; d <= 3; ++d) {
    const Trajectory t = FitQuintic({0, 1.75}, {v * d, 5.25}, {});
    double peak = 0.0;
    for (double x = 0; x <= v * d; x += 0.1) {
      peak = std::max(peak, std::abs(t.Sample(x).ddy) * v * v);
    }
    EXPECT_LT(peak, previous);
    previous = peak;
  }
}

TEST(TrajectoryCsvTest, HeaderAndRows) {
  const Trajectory t = FitQuintic({0, 0}, {10, 3.5}, {});
  std::ostringstream os;
  WriteTrajectoryCsv(t, 1.0, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,y,dy,ddy");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 11);
}

}  // namespace
}  // namespace lcdqn::plan
