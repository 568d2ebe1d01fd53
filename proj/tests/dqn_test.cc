#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lcdqn/dqn.h"
#include "lcdqn/errors.h"

namespace lcdqn::dqn {
namespace {

// Dueling head directly on a one-hot state: Q(s, .) reproduces `table` row s.
nn::NetworkParams TabularNet(const Eigen::MatrixXd& table) {
  const int states = static_cast<int>(table.rows());
  const int actions = static_cast<int>(table.cols());
  nn::Architecture arch;
  arch.input = {1, 1, states};
  arch.layers = {nn::LayerSpec::DuelingHead(actions)};
  nn::NetworkParams p = nn::Init(arch, 0);
  p.tensors[0] = table.rowwise().mean().transpose();  // W_value
  p.tensors[1].setZero();
  p.tensors[2] = table.transpose();  // W_adv
  p.tensors[3].setZero();
  return p;
}

std::vector<double> OneHot(int i, int n) {
  std::vector<double> v(n, 0.0);
  v[i] = 1.0;
  return v;
}

Transition Make(double value, int action = 0, bool terminal = false) {
  return {{value, value + 1}, action, value * 10, {value + 2, value + 3}, terminal};
}

TEST(ReplayBufferTest, RingEviction) {
  ReplayBuffer b(3, 2, 2);
  for (int i = 1; i <= 4; ++i) b.Push(Make(i));
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b.At(0), Make(2));
  EXPECT_EQ(b.At(1), Make(3));
  EXPECT_EQ(b.At(2), Make(4));
}

TEST(ReplayBufferTest, FillsToCapacity) {
  ReplayBuffer b(100000, 1, 2);
  const Transition t{{0.0}, 1, 0.0, {0.0}, false};
  for (int i = 0; i < 100000; ++i) b.Push(t);
  EXPECT_EQ(b.size(), 100000u);
  b.Push(t);
  EXPECT_EQ(b.size(), 100000u);
}

TEST(ReplayBufferTest, SampleSingleAndErrors) {
  ReplayBuffer b(4, 2, 2);
  Rng rng(1);
  EXPECT_THROW(b.Sample(1, rng), NotReadyError);
  b.Push(Make(7, 1, true));
  const Batch batch = b.Sample(1, rng);
  EXPECT_EQ(batch.obs(0, 0), 7.0);
  EXPECT_EQ(batch.actions[0], 1);
  EXPECT_TRUE(batch.terminal[0]);
  EXPECT_EQ(batch.rewards(0), 70.0);
  EXPECT_EQ(batch.next_obs(1, 0), 10.0);
  EXPECT_THROW(b.Sample(2, rng), NotReadyError);
  EXPECT_THROW(b.Push({{1.0}, 0, 0.0, {1.0}, false}), UsageError);
  EXPECT_THROW(b.Push({{1.0, 2.0}, 2, 0.0, {1.0, 2.0}, false}), UsageError);
}

TEST(ReplayBufferTest, SameSeedSameBatch) {
  ReplayBuffer b(50, 2, 2);
  for (int i = 0; i < 50; ++i) b.Push(Make(i));
  Rng r1(5), r2(5);
  const Batch x = b.Sample(16, r1), y = b.Sample(16, r2);
  EXPECT_EQ(x.obs, y.obs);
  EXPECT_EQ(x.actions, y.actions);
}

TEST(ReplayBufferTest, SaveLoadRoundTrip) {
  ReplayBuffer b(5, 2, 2);
  for (int i = 0; i < 8; ++i) b.Push(Make(i, i % 2, i % 3 == 0));
  std::stringstream ss;
  b.Save(ss);
  const ReplayBuffer c = ReplayBuffer::Load(ss);
  ASSERT_EQ(c.size(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(c.At(i), b.At(i));
  std::stringstream bad("garbage");
  EXPECT_THROW(ReplayBuffer::Load(bad), ConfigError);
}

TEST(EpsilonTest, LinearAnneal) {
  const EpsilonSchedule s;
  EXPECT_EQ(s.At(0), 1.0);
  EXPECT_NEAR(s.At(75000), 0.55, 1e-12);
  EXPECT_EQ(s.At(150000), 0.1);
  EXPECT_EQ(s.At(10000000), 0.1);
}

TEST(SelectActionTest, GreedyAndUniform) {
  Eigen::MatrixXd table(1, 4);
  table << 1.0, 3.0, 2.0, 0.5;
  const nn::NetworkParams net = TabularNet(table);
  Rng rng(3);
  EXPECT_EQ(SelectAction(net, OneHot(0, 1), 0.0, rng), 1);
  std::vector<int> counts(4, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[SelectAction(net, OneHot(0, 1), 1.0, rng)];
  for (int c : counts) EXPECT_NEAR(c, n / 4.0, 5 * std::sqrt(n * 0.25 * 0.75));
  EXPECT_THROW(SelectAction(net, OneHot(0, 1), 1.5, rng), UsageError);
}

TEST(ArgmaxTest, TiesGoLow) {
  Eigen::VectorXd v(3);
  v << 2.0, 2.0, 1.0;
  EXPECT_EQ(Argmax(v), 0);
}

Batch OneTransition(int state, int action, double reward, int next, bool terminal,
                    int states) {
  return Batch::FromTransitions(
      {{OneHot(state, states), action, reward, OneHot(next, states), terminal}});
}

TEST(TdTargetsTest, TerminalCutoff) {
  Eigen::MatrixXd t(2, 2);
  t << 1, 2, 5, 3;
  const auto net = TabularNet(t);
  EXPECT_EQ(TdTargets(net, net, OneTransition(0, 0, 1000.0, 1, true, 2), 0.99)(0), 1000.0);
}

TEST(TdTargetsTest, DoubleDqnHandExample) {
  Eigen::MatrixXd main(1, 2), target(1, 2);
  main << 1.0, 2.0;
  target << 5.0, 3.0;
  const Batch b = OneTransition(0, 0, 0.0, 0, false, 1);
  const auto y = TdTargets(TabularNet(main), TabularNet(target), b, 0.99, true);
  EXPECT_NEAR(y(0), 2.97, 1e-12);
  const auto plain = TdTargets(TabularNet(main), TabularNet(target), b, 0.99, false);
  EXPECT_NEAR(plain(0), 4.95, 1e-12);
}

TEST(TdTargetsTest, IdenticalNetsReduceToMax) {
  Eigen::MatrixXd t(3, 3);
  t << 1, 4, 2, 0, -1, 3, 7, 7, 1;
  const auto net = TabularNet(t);
  for (int s = 0; s < 3; ++s) {
    const Batch b = OneTransition(0, 0, 1.5, s, false, 3);
    EXPECT_NEAR(TdTargets(net, net, b, 0.9, true)(0), 1.5 + 0.9 * t.row(s).maxCoeff(),
                1e-12);
  }
}

TEST(LossTest, ZeroWhenPredictionsMatchTargets) {
  Eigen::MatrixXd t(2, 2);
  t << 1, 2, 3, 4;
  const auto net = TabularNet(t);
  // Terminal with r = Q(s, a).
  const Batch b = OneTransition(1, 0, 3.0, 0, true, 2);
  const TrainStepResult r = LossAndGradients(net, net, b, 0.99);
  EXPECT_NEAR(r.loss, 0.0, 1e-24);
  for (const auto& g : r.grads) EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LossTest, HandComputedSingleTransition) {
  Eigen::MatrixXd t(1, 2);
  t << 1.0, 3.0;
  const auto net = TabularNet(t);
  const Batch b = OneTransition(0, 1, 10.0, 0, true, 1);
  const TrainStepResult r = LossAndGradients(net, net, b, 0.99);
  EXPECT_NEAR(r.loss, 0.5 * 49.0, 1e-12);
  // dQ(0)/dbias_value = 1, so the value-bias gradient is err = -7.
  EXPECT_NEAR(r.grads[1](0, 0), -7.0, 1e-12);
}

TEST(TrainStepTest, LossDecreasesOnFixedBatch) {
  nn::NetworkParams net = nn::Init(nn::MakeListArchitecture(4, 3, 16, 2), 1);
  const nn::NetworkParams target = net;
  nn::AdamState adam = nn::MakeAdam(net, 1e-3);
  std::vector<Transition> ts;
  Rng rng(2);
  for (int i = 0; i < 8; ++i) {
    Transition t;
    for (int k = 0; k < 4; ++k) {
      t.obs.push_back(UniformReal(rng, -1, 1));
      t.next_obs.push_back(UniformReal(rng, -1, 1));
    }
    t.action = i % 3;
    t.reward = UniformReal(rng, -1, 1);
    t.terminal = i % 2 == 0;
    ts.push_back(t);
  }
  const Batch b = Batch::FromTransitions(ts);
  double previous = TrainStep(net, adam, target, b, 0.99);
  for (int i = 0; i < 100; ++i) {
    const double loss = TrainStep(net, adam, target, b, 0.99);
    EXPECT_LE(loss, previous + 1e-12) << "iteration " << i;
    previous = loss;
  }
}

TEST(TrainStepTest, NonFiniteLossLeavesNetworkUntouched) {
  nn::NetworkParams net = nn::Init(nn::MakeListArchitecture(2, 2, 4, 1), 1);
  const nn::NetworkParams before = net;
  nn::AdamState adam = nn::MakeAdam(net, 1e-3);
  const Batch b = Batch::FromTransitions(
      {{{0.1, 0.2}, 0, std::nan(""), {0.3, 0.4}, true}});
  EXPECT_THROW(TrainStep(net, adam, net, b, 0.99), TrainingError);
  for (std::size_t i = 0; i < net.tensors.size(); ++i) {
    EXPECT_EQ(net.tensors[i], before.tensors[i]);
  }
}

TEST(SyncTargetTest, CopiesAndChecksArchitecture) {
  const nn::NetworkParams main = nn::Init(nn::MakeListArchitecture(2, 2, 4, 1), 1);
  nn::NetworkParams target = nn::Init(nn::MakeListArchitecture(2, 2, 4, 1), 2);
  SyncTarget(main, target);
  EXPECT_EQ(target.tensors[0], main.tensors[0]);
  nn::NetworkParams other = nn::Init(nn::MakeListArchitecture(2, 3, 4, 1), 2);
  EXPECT_THROW(SyncTarget(main, other), UsageError);
}

TEST(DqnConfigTest, Validation) {
  DqnConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.gamma = 1.5;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.buffer_capacity = 8;
  EXPECT_THROW(c.Validate(), ConfigError);
}

}  // namespace
}  // namespace lcdqn::dqn
