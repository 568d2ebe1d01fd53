#include <gtest/gtest.h>

#include <cmath>

#include "lcdqn/errors.h"
#include "lcdqn/nn.h"
#include "lcdqn/rng.h"

namespace lcdqn::nn {
namespace {

Eigen::MatrixXd RandomMatrix(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                             double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = UniformReal(rng, -scale, scale);
  return m;
}

// Max relative error of Backward against central differences of sum(W .* Q).
double GradientError(const Architecture& arch, std::uint64_t seed) {
  NetworkParams params = Init(arch, seed);
  Rng rng(seed + 1);
  // Non-zero biases so that every bias gradient path is exercised.
  for (auto& t : params.tensors) {
    if (t.cols() == 1) t = RandomMatrix(t.rows(), 1, rng, 0.1);
  }
  const Eigen::MatrixXd x = RandomMatrix(arch.InputSize(), 2, rng);
  const Eigen::MatrixXd w = RandomMatrix(arch.OutputSize(), 2, rng);
  const ForwardResult fwd = Forward(params, x);
  const Gradients g = Backward(params, fwd.cache, w);
  auto loss = [&] { return (Predict(params, x).array() * w.array()).sum(); };
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    for (Eigen::Index i = 0; i < params.tensors[t].size(); ++i) {
      double& p = params.tensors[t].data()[i];
      const double saved = p;
      p = saved + h;
      const double up = loss();
      p = saved - h;
      const double down = loss();
      p = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = g[t].data()[i];
      worst = std::max(worst, std::abs(numeric - analytic) /
                                  std::max(1.0, std::abs(numeric) + std::abs(analytic)));
    }
  }
  return worst;
}

TEST(ArchitectureTest, ListShapes) {
  const Architecture a = MakeListArchitecture(6, 6);
  EXPECT_NO_THROW(a.Validate());
  EXPECT_EQ(a.InputSize(), 6);
  EXPECT_EQ(a.OutputSize(), 6);
  ASSERT_EQ(a.layers.size(), 4u);
  EXPECT_EQ(a.layers[0].units, 50);
  EXPECT_EQ(a.layers[3].kind, LayerKind::kDuelingHead);
}

TEST(ArchitectureTest, GridShapes) {
  const Architecture a = MakeGridArchitecture(2, 100, 6);
  EXPECT_NO_THROW(a.Validate());
  const auto shapes = a.LayerShapes();
  EXPECT_EQ(shapes[1].channels, 16);
  EXPECT_EQ(shapes[1].height, 2);
  EXPECT_EQ(shapes[1].width, 48);
  EXPECT_EQ(shapes[2].channels, 32);
  EXPECT_EQ(shapes[2].width, 23);
  EXPECT_EQ(a.OutputSize(), 6);
}

TEST(ArchitectureTest, FingerprintIsStableAndDistinct) {
  EXPECT_EQ(MakeListArchitecture(6, 6).Fingerprint(),
            MakeListArchitecture(6, 6).Fingerprint());
  EXPECT_NE(MakeListArchitecture(6, 6).Fingerprint(),
            MakeListArchitecture(6, 8).Fingerprint());
}

TEST(ArchitectureTest, RejectsBadConv) {
  Architecture a = MakeGridArchitecture(2, 100, 6);
  a.layers[0].kernel_w = 200;
  EXPECT_THROW(a.Validate(), UsageError);
}

TEST(InitTest, DeterministicPerSeed) {
  const Architecture a = MakeListArchitecture(6, 6);
  const NetworkParams p = Init(a, 4);
  const NetworkParams q = Init(a, 4);
  ASSERT_EQ(p.tensors.size(), q.tensors.size());
  for (std::size_t i = 0; i < p.tensors.size(); ++i) EXPECT_EQ(p.tensors[i], q.tensors[i]);
  EXPECT_NE(Init(a, 5).tensors[0], p.tensors[0]);
}

TEST(InitTest, HeBoundAndZeroBiases) {
  const NetworkParams p = Init(MakeListArchitecture(3, 6), 1);
  const double bound = std::sqrt(6.0 / 3.0);
  EXPECT_LE(p.tensors[0].cwiseAbs().maxCoeff(), bound);
  // A uniform draw of 150 values should come close to the bound.
  EXPECT_GT(p.tensors[0].cwiseAbs().maxCoeff(), 0.8 * bound);
  EXPECT_TRUE(p.tensors[1].isZero());
}

TEST(ForwardTest, ZeroParametersGiveZeroQ) {
  NetworkParams p = Init(MakeListArchitecture(6, 6), 1);
  for (auto& t : p.tensors) t.setZero();
  Rng rng(2);
  EXPECT_TRUE(Predict(p, RandomMatrix(6, 4, rng)).isZero());
}

TEST(ForwardTest, DuelingCombine) {
  Eigen::RowVectorXd v(1);
  v << 1.0;
  Eigen::MatrixXd a(3, 1);
  a << 2.0, 0.0, 1.0;
  const Eigen::MatrixXd q = DuelingCombine(v, a);
  EXPECT_EQ(q(0, 0), 2.0);
  EXPECT_EQ(q(1, 0), 0.0);
  EXPECT_EQ(q(2, 0), 1.0);
}

TEST(ForwardTest, BatchColumnsAreIndependent) {
  const NetworkParams p = Init(MakeGridArchitecture(2, 30, 6, 10), 3);
  Rng rng(4);
  const Eigen::MatrixXd x = RandomMatrix(p.arch.InputSize(), 5, rng);
  const Eigen::MatrixXd q = Predict(p, x);
  for (int c = 0; c < 5; ++c) {
    const std::vector<double> col(x.col(c).data(), x.col(c).data() + x.rows());
    EXPECT_TRUE(PredictOne(p, col).isApprox(q.col(c), 1e-14));
  }
}

TEST(ForwardTest, WrongInputSize) {
  const NetworkParams p = Init(MakeListArchitecture(6, 6), 3);
  EXPECT_THROW(PredictOne(p, std::vector<double>(5, 0.0)), UsageError);
}

TEST(BackwardTest, DenseListGradients) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    EXPECT_LT(GradientError(MakeListArchitecture(4, 3, 6, 2), s), 1e-4) << s;
  }
}

TEST(BackwardTest, ConvGridGradients) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    EXPECT_LT(GradientError(MakeGridArchitecture(2, 16, 4, 5), s), 1e-4) << s;
  }
}

TEST(BackwardTest, DeadReluPassesNoGradient) {
  Architecture a;
  a.input = {1, 1, 2};
  a.layers = {LayerSpec::Dense(1, Activation::kRelu), LayerSpec::DuelingHead(2)};
  NetworkParams p = Init(a, 1);
  p.tensors[0] << 1.0, 1.0;
  p.tensors[1](0, 0) = -10.0;  // pre-activation stays negative
  Eigen::MatrixXd x(2, 1);
  x << 0.5, 0.5;
  const ForwardResult f = Forward(p, x);
  const Gradients g = Backward(p, f.cache, Eigen::MatrixXd::Ones(2, 1));
  EXPECT_TRUE(g[0].isZero());
  EXPECT_TRUE(g[1].isZero());
}

TEST(BackwardTest, StaleCacheRejected) {
  NetworkParams p = Init(MakeListArchitecture(6, 6), 3);
  Rng rng(1);
  const ForwardResult f = Forward(p, RandomMatrix(6, 2, rng));
  AdamState adam = MakeAdam(p, 1e-3);
  AdamStep(p, ZeroGradients(p), adam);
  EXPECT_THROW(Backward(p, f.cache, Eigen::MatrixXd::Zero(6, 2)), UsageError);
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  NetworkParams p = Init(MakeListArchitecture(6, 6), 3);
  const NetworkParams before = p;
  AdamState s = MakeAdam(p, 1e-3);
  AdamStep(p, ZeroGradients(p), s);
  EXPECT_EQ(s.step, 1u);
  for (std::size_t i = 0; i < p.tensors.size(); ++i) EXPECT_EQ(p.tensors[i], before.tensors[i]);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  NetworkParams p = Init(MakeListArchitecture(2, 2, 3, 1), 3);
  const NetworkParams before = p;
  AdamState s = MakeAdam(p, 0.01);
  Gradients g = ZeroGradients(p);
  g[0](0, 0) = 5.0;
  g[0](1, 0) = -0.2;
  AdamStep(p, g, s);
  EXPECT_NEAR(p.tensors[0](0, 0) - before.tensors[0](0, 0), -0.01, 1e-9);
  EXPECT_NEAR(p.tensors[0](1, 0) - before.tensors[0](1, 0), 0.01, 1e-9);
}

TEST(AdamTest, Deterministic) {
  NetworkParams a = Init(MakeListArchitecture(6, 6), 3);
  NetworkParams b = a;
  AdamState sa = MakeAdam(a, 1e-3), sb = MakeAdam(b, 1e-3);
  Rng rng(8);
  Gradients g = ZeroGradients(a);
  for (auto& t : g) t = RandomMatrix(t.rows(), t.cols(), rng);
  for (int i = 0; i < 3; ++i) {
    AdamStep(a, g, sa);
    AdamStep(b, g, sb);
  }
  for (std::size_t i = 0; i < a.tensors.size(); ++i) EXPECT_EQ(a.tensors[i], b.tensors[i]);
}

TEST(AdamTest, NonFiniteGradientRejectedWithoutUpdate) {
  NetworkParams p = Init(MakeListArchitecture(6, 6), 3);
  const NetworkParams before = p;
  AdamState s = MakeAdam(p, 1e-3);
  Gradients g = ZeroGradients(p);
  g[2](0, 0) = std::nan("");
  EXPECT_THROW(AdamStep(p, g, s), TrainingError);
  EXPECT_EQ(s.step, 0u);
  for (std::size_t i = 0; i < p.tensors.size(); ++i) EXPECT_EQ(p.tensors[i], before.tensors[i]);
}

TEST(ParamsTest, CopyFromChecksArchitecture) {
  NetworkParams a = Init(MakeListArchitecture(6, 6), 1);
  NetworkParams b = Init(MakeListArchitecture(6, 6), 2);
  const auto version = b.version;
  b.CopyFrom(a);
  EXPECT_EQ(b.tensors[0], a.tensors[0]);
  EXPECT_GT(b.version, version);
  NetworkParams c = Init(MakeListArchitecture(6, 4), 2);
  EXPECT_THROW(c.CopyFrom(a), UsageError);
}

}  // namespace
}  // namespace lcdqn::nn
