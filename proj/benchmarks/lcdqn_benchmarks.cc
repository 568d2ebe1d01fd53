#include <benchmark/benchmark.h>

#include <vector>

#include "lcdqn/dqn.h"
#include "lcdqn/harness.h"
#include "lcdqn/nn.h"
#include "lcdqn/plan.h"
#include "lcdqn/rng.h"
#include "lcdqn/run_config.h"

namespace {

using namespace lcdqn;

nn::Architecture Arch(bool grid) {
  return DefaultRunConfig(env::ScenarioKind::kOvertake,
                          grid ? observe::ObservationKind::kGrid
                               : observe::ObservationKind::kLimited)
      .MakeArchitecture();
}

Eigen::MatrixXd RandomInput(const nn::Architecture& arch, int batch) {
  Rng rng(1);
  Eigen::MatrixXd x(arch.InputSize(), batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = UniformReal(rng, -1, 1);
  return x;
}

void BM_Forward(benchmark::State& state) {
  const nn::Architecture arch = Arch(state.range(0) != 0);
  const nn::NetworkParams p = nn::Init(arch, 1);
  const Eigen::MatrixXd x = RandomInput(arch, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(nn::Predict(p, x));
}
BENCHMARK(BM_Forward)->ArgsProduct({{0, 1}, {1, 32}});

void BM_ForwardBackward(benchmark::State& state) {
  const nn::Architecture arch = Arch(state.range(0) != 0);
  const nn::NetworkParams p = nn::Init(arch, 1);
  const Eigen::MatrixXd x = RandomInput(arch, 32);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Ones(arch.OutputSize(), 32);
  for (auto _ : state) {
    const nn::ForwardResult f = nn::Forward(p, x);
    benchmark::DoNotOptimize(nn::Backward(p, f.cache, w));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1);

void BM_TrainStep(benchmark::State& state) {
  const nn::Architecture arch = Arch(false);
  nn::NetworkParams main = nn::Init(arch, 1);
  const nn::NetworkParams target = main;
  nn::AdamState adam = nn::MakeAdam(main, 1e-4);
  Rng rng(2);
  std::vector<dqn::Transition> ts(32);
  for (auto& t : ts) {
    t.obs.resize(arch.InputSize());
    t.next_obs.resize(arch.InputSize());
    for (auto& v : t.obs) v = UniformReal(rng, -1, 1);
    for (auto& v : t.next_obs) v = UniformReal(rng, -1, 1);
    t.action = static_cast<int>(UniformIndex(rng, arch.OutputSize()));
    t.reward = UniformReal(rng, -5, 5);
  }
  const dqn::Batch batch = dqn::Batch::FromTransitions(ts);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dqn::TrainStep(main, adam, target, batch, 0.99));
  }
}
BENCHMARK(BM_TrainStep);

void BM_GreedyEpisode(benchmark::State& state) {
  const TrainRunConfig config =
      DefaultRunConfig(env::ScenarioKind::kOvertake, observe::ObservationKind::kLimited);
  const harness::EpisodeSetup setup = harness::MakeSetup(config);
  const harness::Policy policy = harness::GreedyPolicy(nn::Init(config.MakeArchitecture(), 1));
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  for (auto _ : state) {
    const auto r = harness::RunEpisode(policy, env::Reset(setup.scenario, seed++), setup, false);
    steps += r.steps;
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps),
                                                 benchmark::Counter::kIsRate);
}
BENCHMARK(BM_GreedyEpisode);

void BM_FitQuintic(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-3;
    benchmark::DoNotOptimize(plan::FitQuintic({x, 1.75}, {x + 100.0, 5.25}, {0.01, 0.001}));
  }
}
BENCHMARK(BM_FitQuintic);

}  // namespace
BENCHMARK_MAIN();
