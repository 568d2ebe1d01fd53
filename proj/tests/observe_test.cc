#include <gtest/gtest.h>

#include "lcdqn/errors.h"
#include "lcdqn/observe.h"
#include "test_util.h"

namespace lcdqn::observe {
namespace {

using testing::MakeWorld;
using testing::Vehicle;

class ObserveTest : public ::testing::Test {
 protected:
  env::ScenarioConfig scenario;
  ObservationSpec full = MakeObservationSpec(ObservationKind::kFull, scenario);
  ObservationSpec limited = MakeObservationSpec(ObservationKind::kLimited, scenario);
  ObservationSpec grid = MakeObservationSpec(ObservationKind::kGrid, scenario);
};

TEST_F(ObserveTest, SpecDefaultsFollowScenario) {
  EXPECT_EQ(full.slot_count, 2);
  EXPECT_EQ(full.Dimension(), 6);
  EXPECT_DOUBLE_EQ(full.position_scale, 150.0);
  EXPECT_DOUBLE_EQ(full.lateral_scale, 7.0);
  EXPECT_EQ(grid.grid_rows, 2);
  EXPECT_EQ(grid.Dimension(), 2 * 2 * 100);
}

TEST_F(ObserveTest, SlotEncoding) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(50.0, 1.75, 30.0)});
  const ListObservation o = BuildFull(w, full);
  ASSERT_EQ(o.slots.size(), 2u);
  EXPECT_DOUBLE_EQ(o.slots[0][0], 50.0 / 150.0);
  EXPECT_DOUBLE_EQ(o.slots[0][1], 0.0);
  EXPECT_DOUBLE_EQ(o.slots[0][2], 0.0);
  EXPECT_EQ(o.slots[1], Sentinel(full));
}

TEST_F(ObserveTest, OncomingRelativeVelocityAndLateralOffset) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 100.0 / 3.0),
                           {Vehicle(-20.0, 5.25, 70.0 / 3.0, -1)});
  const ListObservation o = BuildFull(w, full);
  EXPECT_DOUBLE_EQ(o.slots[0][0], -20.0 / 150.0);
  EXPECT_DOUBLE_EQ(o.slots[0][1], 3.5 / 7.0);
  EXPECT_NEAR(o.slots[0][2], (-70.0 / 3.0 - 100.0 / 3.0) / scenario.v_max, 1e-12);
}

TEST_F(ObserveTest, SortedByAbsoluteDistance) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(90.0, 1.75, 20.0), Vehicle(-40.0, 5.25, 20.0)});
  const ListObservation o = BuildFull(w, full);
  EXPECT_DOUBLE_EQ(o.slots[0][0], -40.0 / 150.0);
  EXPECT_DOUBLE_EQ(o.slots[1][0], 90.0 / 150.0);
}

TEST_F(ObserveTest, EmptyWorldIsAllSentinels) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0));
  for (const auto& slot : BuildLimited(w, limited).slots) {
    EXPECT_EQ(slot, Sentinel(limited));
  }
  EXPECT_DOUBLE_EQ(Sentinel(limited)[0], 1.0);
}

TEST_F(ObserveTest, LimitedViewRangeIsClosed) {
  auto at = [&](double dx) {
    const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                             {Vehicle(dx, 1.75, 30.0)});
    return BuildLimited(w, limited).slots[0];
  };
  EXPECT_EQ(at(200.0), Sentinel(limited));
  EXPECT_DOUBLE_EQ(at(149.0)[0], 149.0 / 150.0);
  EXPECT_DOUBLE_EQ(at(150.0)[0], 1.0);
  EXPECT_DOUBLE_EQ(at(150.0)[2], 0.0);
  EXPECT_DOUBLE_EQ(at(-150.0)[0], -1.0);
  EXPECT_EQ(at(-150.5), Sentinel(limited));
}

TEST_F(ObserveTest, FullViewKeepsDistantVehicles) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(280.0, 1.75, 30.0)});
  EXPECT_DOUBLE_EQ(BuildFull(w, full).slots[0][0], 280.0 / 150.0);
}

TEST_F(ObserveTest, TranslationInvariance) {
  auto w = MakeWorld(scenario, Vehicle(3.0, 1.9, 30.0),
                     {Vehicle(50.0, 1.75, 20.0), Vehicle(-60.0, 5.25, 25.0, -1)});
  const auto before = Encode(w, limited, scenario);
  const auto grid_before = Encode(w, grid, scenario);
  w.ego.x += 500.0;
  for (auto& o : w.others) o.x += 500.0;
  EXPECT_EQ(Encode(w, limited, scenario), before);
  EXPECT_EQ(Encode(w, grid, scenario), grid_before);
}

TEST_F(ObserveTest, TooManyVehiclesForSlots) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(50.0, 1.75, 20.0), Vehicle(100.0, 1.75, 20.0),
                            Vehicle(150.0, 1.75, 20.0)});
  EXPECT_THROW(BuildFull(w, full), ConfigError);
}

TEST_F(ObserveTest, GridCellOfVehicleAhead) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(30.0, 1.75, 30.0)});
  const GridObservation g = BuildGrid(w, grid, scenario);
  EXPECT_EQ(g.Occupancy(0, 60), 1.0);
  EXPECT_EQ(g.Occupancy(0, 50), 1.0);  // the ego itself
  EXPECT_EQ(g.Velocity(0, 50), 0.0);
}

TEST_F(ObserveTest, GridEmptyWorldMarksOnlyEgo) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 5.25, 30.0));
  const GridObservation g = BuildGrid(w, grid, scenario);
  double total = 0.0;
  for (double v : g.occupancy) total += v;
  EXPECT_EQ(total, 1.0);
  EXPECT_EQ(g.Occupancy(1, 50), 1.0);
  for (double v : g.velocity) EXPECT_EQ(v, 0.0);
}

TEST_F(ObserveTest, GridOncomingVelocity) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 100.0 / 3.0),
                           {Vehicle(60.0, 5.25, 70.0 / 3.0, -1)});
  const GridObservation g = BuildGrid(w, grid, scenario);
  EXPECT_EQ(g.Occupancy(1, 70), 1.0);
  EXPECT_NEAR(g.Velocity(1, 70), -170.0 / 3.0 / scenario.v_max, 1e-12);
}

TEST_F(ObserveTest, GridDropsVehiclesOutsideWindow) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(150.0, 1.75, 30.0), Vehicle(-151.0, 1.75, 30.0)});
  const GridObservation g = BuildGrid(w, grid, scenario);
  double total = 0.0;
  for (double v : g.occupancy) total += v;
  EXPECT_EQ(total, 1.0);
}

TEST_F(ObserveTest, GridFlattenIsChannelMajor) {
  const auto w = MakeWorld(scenario, Vehicle(0.0, 1.75, 30.0),
                           {Vehicle(30.0, 5.25, 20.0)});
  const GridObservation g = BuildGrid(w, grid, scenario);
  const auto flat = g.Flatten();
  ASSERT_EQ(flat.size(), 400u);
  EXPECT_EQ(flat[1 * 100 + 60], 1.0);
  EXPECT_NEAR(flat[200 + 1 * 100 + 60], -10.0 / scenario.v_max, 1e-12);
}

TEST(ObservationKindTest, ParseRoundTrip) {
  for (auto k : {ObservationKind::kFull, ObservationKind::kLimited, ObservationKind::kGrid}) {
    EXPECT_EQ(ParseObservationKind(ToString(k)), k);
  }
  EXPECT_THROW(ParseObservationKind("radar"), ConfigError);
}

}  // namespace
}  // namespace lcdqn::observe
