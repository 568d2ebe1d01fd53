#ifndef LCDQN_TOOLS_COMMANDS_H_
#define LCDQN_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lcdqn::cli {

namespace fs = std::filesystem;

// Episode-count overrides shared by the verbs that run episodes.
struct RunOverrides {
  std::optional<int> episodes;
  std::optional<int> eval_interval;
  std::optional<int> eval_episodes;
};

struct TrainArgs {
  fs::path config;
  std::vector<std::uint64_t> seeds;  // empty: take them from the config
  bool single_seed = false;          // --seed: write directly into out
  fs::path out;
  RunOverrides overrides;
  int jobs = 0;  // 0: one worker per seed, capped by the hardware
  bool quiet = false;
};

struct EvalArgs {
  fs::path model;
  fs::path config;
  int episodes = 100;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> seed_base;
  std::optional<fs::path> out;
};

struct RolloutArgs {
  std::optional<fs::path> model;
  std::optional<int> constant_action;
  fs::path config;
  std::uint64_t seed = 1;
  fs::path trace;
  std::optional<fs::path> svg;
  int stride = 10;
};

struct PlotArgs {
  std::vector<fs::path> metrics;
  std::string label = "run";
  std::vector<std::string> groups;  // "label=a.jsonl,b.jsonl"
  std::vector<fs::path> trajectories;
  bool family = false;
  double speed = 120.0 / 3.6;
  int d_max = 3;
  double lane_width = 3.5;
  std::optional<fs::path> csv_dir;
  fs::path out;
};

struct VerifyArgs {
  std::string fault = "none";
};

struct ConfigArgs {
  std::optional<fs::path> config;
  std::string scenario = "overtake";
  std::string observation = "limited";
  bool json = false;
};

int Train(const TrainArgs& args);
int Eval(const EvalArgs& args);
int Rollout(const RolloutArgs& args);
int Plot(const PlotArgs& args);
int Verify(const VerifyArgs& args);
int PrintConfig(const ConfigArgs& args);

}  // namespace lcdqn::cli

#endif  // LCDQN_TOOLS_COMMANDS_H_
