#ifndef LCDQN_TESTS_TEST_UTIL_H_
#define LCDQN_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "lcdqn/env.h"

namespace lcdqn::testing {

inline env::VehicleState Vehicle(double x, double y, double v, int direction = 1,
                                 double v_limit = 84.0 / 3.6) {
  env::VehicleState s;
  s.x = x;
  s.y = y;
  s.v = v;
  s.direction = direction;
  s.v_limit = v_limit;
  return s;
}

// Running world with the ego at `ego` and the given traffic.
inline env::WorldState MakeWorld(const env::ScenarioConfig& config,
                                 const env::VehicleState& ego,
                                 std::vector<env::VehicleState> others = {}) {
  env::WorldState w;
  w.ego = ego;
  w.ego.v_limit = config.v_max;
  w.ego_lateral.y = ego.y;
  w.others = std::move(others);
  w.initial_lane_center = config.LaneCenter(config.initial_lane);
  return w;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              ("lcdqn-test-" + name + "-" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace lcdqn::testing

#endif  // LCDQN_TESTS_TEST_UTIL_H_
