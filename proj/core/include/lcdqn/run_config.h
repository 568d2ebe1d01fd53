#ifndef LCDQN_RUN_CONFIG_H_
#define LCDQN_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lcdqn/config_file.h"
#include "lcdqn/dqn.h"
#include "lcdqn/env.h"
#include "lcdqn/nn.h"
#include "lcdqn/observe.h"
#include "lcdqn/plan.h"

namespace lcdqn {

// Everything needed to reproduce one training run apart from the seed.
struct TrainRunConfig {
  env::ScenarioConfig scenario;
  observe::ObservationSpec observation;
  int d_max = 3;
  int hidden_units = 50;
  int hidden_layers = 3;
  dqn::DqnConfig dqn;
  // Rewards are multiplied by this before entering the replay buffer.
  double reward_scale = 1.0;
  int total_episodes = 3000;
  int eval_interval = 200;
  int eval_episodes = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  plan::ActionSpace Actions() const {
    return {scenario.n_lanes, d_max, scenario.lane_width};
  }
  nn::Architecture MakeArchitecture() const;
  void Validate() const;
};

// Defaults with the observation spec derived from the scenario.
TrainRunConfig DefaultRunConfig(env::ScenarioKind scenario,
                                observe::ObservationKind observation);

// Applies every recognized key on top of the defaults and rejects unknown
// keys. Observation fields left unset follow the (possibly overridden)
// scenario.
TrainRunConfig RunConfigFromFile(const KeyValueFile& file);
TrainRunConfig LoadRunConfig(const std::filesystem::path& path);

// Canonical key/value rendering; parsing it back yields an equal config.
std::string ToKeyValueText(const TrainRunConfig& config);
nlohmann::json ToJson(const TrainRunConfig& config);

}  // namespace lcdqn

#endif  // LCDQN_RUN_CONFIG_H_
