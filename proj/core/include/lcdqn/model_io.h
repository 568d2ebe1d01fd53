#ifndef LCDQN_MODEL_IO_H_
#define LCDQN_MODEL_IO_H_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "lcdqn/dqn.h"
#include "lcdqn/env.h"
#include "lcdqn/nn.h"
#include "lcdqn/observe.h"
#include "lcdqn/plan.h"

// Self-describing model files: format version, architecture and its
// fingerprint, observation schema, action space and the flat parameter
// tensors. Doubles are written in shortest round-trip decimal form, so a
// save/load cycle is bit-exact.
namespace lcdqn::model_io {

inline constexpr int kFormatVersion = 1;

struct PolicyModel {
  nn::NetworkParams params;
  observe::ObservationSpec observation;
  plan::ActionSpace actions;
};

nlohmann::json ToJson(const nn::Architecture& arch);
nn::Architecture ArchitectureFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const observe::ObservationSpec& spec);
observe::ObservationSpec ObservationFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const plan::ActionSpace& actions);
plan::ActionSpace ActionSpaceFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const env::ScenarioConfig& config);
nlohmann::json ToJson(const dqn::DqnConfig& config);

nlohmann::json TensorsToJson(const std::vector<Eigen::MatrixXd>& tensors);
std::vector<Eigen::MatrixXd> TensorsFromJson(const nlohmann::json& j);

nlohmann::json ModelToJson(const PolicyModel& model);
// Throws ConfigError on a malformed document or fingerprint mismatch.
PolicyModel ModelFromJson(const nlohmann::json& j);

void SaveModel(const PolicyModel& model, const std::filesystem::path& path);
PolicyModel LoadModel(const std::filesystem::path& path);

// Refuses (ConfigError) a model whose observation schema or action space
// differs from what the caller is about to feed it.
void CheckCompatible(const PolicyModel& model,
                     const observe::ObservationSpec& observation,
                     const plan::ActionSpace& actions);

}  // namespace lcdqn::model_io

#endif  // LCDQN_MODEL_IO_H_
