#include <gtest/gtest.h>

#include <fstream>

#include "lcdqn/errors.h"
#include "lcdqn/model_io.h"
#include "lcdqn/rng.h"
#include "test_util.h"

namespace lcdqn::model_io {
namespace {

PolicyModel MakeModel(observe::ObservationKind kind) {
  env::ScenarioConfig scenario;
  PolicyModel m;
  m.observation = observe::MakeObservationSpec(kind, scenario);
  m.actions = {2, 3, 3.5};
  const nn::Architecture arch =
      kind == observe::ObservationKind::kGrid
          ? nn::MakeGridArchitecture(2, 100, 6)
          : nn::MakeListArchitecture(m.observation.Dimension(), 6);
  m.params = nn::Init(arch, 17);
  Rng rng(1);
  for (auto& t : m.params.tensors) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += UniformReal(rng, -0.1, 0.1);
  }
  return m;
}

TEST(ModelIoTest, RoundTripIsBitExact) {
  testing::TempDir dir("model");
  for (auto kind : {observe::ObservationKind::kLimited, observe::ObservationKind::kGrid}) {
    const PolicyModel m = MakeModel(kind);
    SaveModel(m, dir.path() / "m.json");
    const PolicyModel r = LoadModel(dir.path() / "m.json");
    EXPECT_EQ(r.params.tensors, m.params.tensors);
    EXPECT_EQ(r.observation, m.observation);
    EXPECT_EQ(r.actions, m.actions);
    Rng rng(2);
    Eigen::MatrixXd x(m.params.arch.InputSize(), 50);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = UniformReal(rng, -1, 1);
    const Eigen::MatrixXd a = nn::Predict(m.params, x);
    const Eigen::MatrixXd b = nn::Predict(r.params, x);
    EXPECT_EQ(a, b);
  }
}

TEST(ModelIoTest, SchemaDescribesLayout) {
  const nlohmann::json j = ModelToJson(MakeModel(observe::ObservationKind::kLimited));
  EXPECT_EQ(j["format"], "lcdqn-model");
  EXPECT_EQ(j["observation"]["dimension"], 6);
  EXPECT_TRUE(j["observation"]["layout"].get<std::string>().find("sorted by |dx|") !=
              std::string::npos);
}

TEST(ModelIoTest, RejectsTamperedFiles) {
  nlohmann::json j = ModelToJson(MakeModel(observe::ObservationKind::kLimited));
  nlohmann::json bad = j;
  bad["fingerprint"] = "0000";
  EXPECT_THROW(ModelFromJson(bad), ConfigError);
  bad = j;
  bad["format_version"] = 99;
  EXPECT_THROW(ModelFromJson(bad), ConfigError);
  bad = j;
  bad["tensors"][0]["data"].erase(0);
  EXPECT_THROW(ModelFromJson(bad), ConfigError);
  bad = j;
  bad.erase("observation");
  EXPECT_THROW(ModelFromJson(bad), std::exception);
  EXPECT_THROW(ModelFromJson(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(LoadModel("/nonexistent/model.json"), ConfigError);
}

TEST(ModelIoTest, CompatibilityCheck) {
  const PolicyModel m = MakeModel(observe::ObservationKind::kLimited);
  EXPECT_NO_THROW(CheckCompatible(m, m.observation, m.actions));
  env::ScenarioConfig scenario;
  EXPECT_THROW(CheckCompatible(m, observe::MakeObservationSpec(observe::ObservationKind::kFull,
                                                               scenario),
                               m.actions),
               ConfigError);
  EXPECT_THROW(CheckCompatible(m, m.observation, {2, 4, 3.5}), ConfigError);
  observe::ObservationSpec wider = m.observation;
  wider.slot_count = 3;
  EXPECT_THROW(CheckCompatible(m, wider, m.actions), ConfigError);
}

}  // namespace
}  // namespace lcdqn::model_io
