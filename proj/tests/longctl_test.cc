#include <gtest/gtest.h>

#include "lcdqn/longctl.h"
#include "test_util.h"

namespace lcdqn::longctl {
namespace {

using testing::MakeWorld;
using testing::Vehicle;

TEST(AccelCommandTest, SpotValue) {
  const ControllerParams p;
  const GapMeasurement gap{70.0 / 3.0, 60.0, true};
  EXPECT_NEAR(AccelCommand(100.0 / 3.0, gap, p, 100.0 / 3.0), -3.125, 1e-12);
}

TEST(AccelCommandTest, Equilibria) {
  const ControllerParams p;
  EXPECT_EQ(AccelCommand(20.0, {20.0, 30.0, true}, p, 33.0), 0.0);
  EXPECT_EQ(AccelCommand(25.0, {}, p, 25.0), 0.0);
}

TEST(AccelCommandTest, Clamped) {
  const ControllerParams p;
  EXPECT_EQ(AccelCommand(30.0, {0.0, 0.0, true}, p, 30.0), -6.0);
  EXPECT_EQ(AccelCommand(0.0, {}, p, 30.0), 3.0);
}

TEST(FrontVehicleTest, NearestAheadInSameLane) {
  env::ScenarioConfig c;
  const auto w = MakeWorld(c, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(65.0, 1.75, 20.0), Vehicle(25.0, 1.75, 22.0),
                            Vehicle(10.0, 5.25, 10.0)});
  const GapMeasurement g = FrontVehicle(w, c, -1);
  ASSERT_TRUE(g.has_front);
  EXPECT_DOUBLE_EQ(g.dist, 20.0);
  EXPECT_DOUBLE_EQ(g.v_front, 22.0);
}

TEST(FrontVehicleTest, AdjacentLaneOnly) {
  env::ScenarioConfig c;
  const auto w = MakeWorld(c, Vehicle(0.0, 1.75, 30.0), {Vehicle(40.0, 5.25, 20.0)});
  EXPECT_FALSE(FrontVehicle(w, c, -1).has_front);
}

TEST(FrontVehicleTest, IgnoresOncomingAndVehiclesBehind) {
  env::ScenarioConfig c;
  const auto w = MakeWorld(c, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(40.0, 1.75, 20.0, -1), Vehicle(-30.0, 1.75, 20.0)});
  EXPECT_FALSE(FrontVehicle(w, c, -1).has_front);
}

TEST(FrontVehicleTest, TieOnLaneBoundaryPicksLowerLane) {
  env::ScenarioConfig c;
  const auto w = MakeWorld(c, Vehicle(0.0, 3.5, 30.0),
                           {Vehicle(40.0, 1.75, 20.0), Vehicle(20.0, 5.25, 20.0)});
  const GapMeasurement g = FrontVehicle(w, c, -1);
  ASSERT_TRUE(g.has_front);
  EXPECT_DOUBLE_EQ(g.dist, 35.0);
}

TEST(FrontVehicleTest, EgoLeadsNonEgo) {
  env::ScenarioConfig c;
  const auto w = MakeWorld(c, Vehicle(50.0, 1.75, 30.0), {Vehicle(0.0, 1.75, 20.0)});
  const GapMeasurement g = FrontVehicle(w, c, 0);
  ASSERT_TRUE(g.has_front);
  EXPECT_DOUBLE_EQ(g.dist, 45.0);
  EXPECT_DOUBLE_EQ(g.v_front, 30.0);
}

TEST(FrontVehicleTest, OverlapGivesZeroGap) {
  env::ScenarioConfig c;
  const auto w = MakeWorld(c, Vehicle(0.0, 1.75, 30.0), {Vehicle(2.0, 1.75, 20.0)});
  EXPECT_EQ(FrontVehicle(w, c, -1).dist, 0.0);
}

}  // namespace
}  // namespace lcdqn::longctl
