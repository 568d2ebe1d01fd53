#include "lcdqn/verify.h"

#include <cmath>
#include <sstream>

#include "lcdqn/env.h"
#include "lcdqn/errors.h"
#include "lcdqn/longctl.h"
#include "lcdqn/nn.h"
#include "lcdqn/plan.h"
#include "lcdqn/rng.h"

namespace lcdqn::verify {
namespace {

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// Compares Backward against central differences of L = sum(W .* Q).
CheckResult GradientCheck(const std::string& name, const nn::Architecture& arch,
                          Fault fault) {
  nn::NetworkParams params = nn::Init(arch, 7);
  Rng rng(11);
  const int batch = 3;
  Eigen::MatrixXd x(arch.InputSize(), batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = UniformReal(rng, -1, 1);
  Eigen::MatrixXd w(arch.OutputSize(), batch);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = UniformReal(rng, -1, 1);

  const nn::ForwardResult fwd = nn::Forward(params, x);
  nn::Gradients grads = nn::Backward(params, fwd.cache, w);
  if (fault == Fault::kBackwardSign) {
    for (auto& g : grads) g = -g;
  }
  auto loss = [&] { return (nn::Predict(params, x).array() * w.array()).sum(); };

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    Eigen::MatrixXd& tensor = params.tensors[t];
    // A handful of entries per tensor keeps this fast.
    const Eigen::Index count = std::min<Eigen::Index>(tensor.size(), 12);
    for (Eigen::Index k = 0; k < count; ++k) {
      const Eigen::Index idx =
          static_cast<Eigen::Index>(UniformIndex(rng, tensor.size()));
      const double saved = tensor.data()[idx];
      tensor.data()[idx] = saved + h;
      const double up = loss();
      tensor.data()[idx] = saved - h;
      const double down = loss();
      tensor.data()[idx] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[t].data()[idx];
      const double err =
          std::abs(numeric - analytic) / std::max(1.0, std::abs(numeric) + std::abs(analytic));
      worst = std::max(worst, err);
    }
  }
  return {name, worst < 1e-4, "max relative error " + Fmt(worst)};
}

CheckResult DecodeBijection() {
  for (int n_lanes = 1; n_lanes <= 4; ++n_lanes) {
    for (int d_max = 1; d_max <= 5; ++d_max) {
      const int count = plan::ActionCount(n_lanes, d_max);
      if (count != n_lanes * d_max) {
        return {"action decode bijection", false, "wrong action count"};
      }
      for (int a = 0; a < count; ++a) {
        const plan::ActionSpec s = plan::DecodeAction(a, d_max, n_lanes, 3.5);
        if (plan::EncodeAction(s.lane_index, s.distance_factor, d_max) != a ||
            s.distance_factor < 1 || s.distance_factor > d_max) {
          return {"action decode bijection", false,
                  "round trip failed for action " + std::to_string(a)};
        }
      }
    }
  }
  return {"action decode bijection", true, "n_lanes 1..4, d_max 1..5"};
}

CheckResult QuinticBoundaries() {
  double worst = 0.0;
  double qp_gap = 0.0;
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const plan::Point start{UniformReal(rng, -50, 50), UniformReal(rng, 0, 7)};
    const plan::Point target{start.x + UniformReal(rng, 10, 150),
                             UniformReal(rng, 0, 7)};
    const plan::Derivatives d{UniformReal(rng, -0.1, 0.1),
                              UniformReal(rng, -0.01, 0.01)};
    const plan::Trajectory traj = plan::FitQuintic(start, target, d);
    const plan::LateralPoint a = traj.Sample(start.x);
    const plan::LateralPoint b = traj.Sample(target.x);
    for (double r : {a.y - start.y, a.dy - d.dy, a.ddy - d.ddy, b.y - target.y,
                     b.dy, b.ddy}) {
      worst = std::max(worst, std::abs(r));
    }
    // With six constraints the degree-5 program has a single feasible point.
    const auto qp = plan::FitPolynomialQp(start, target, d, 5);
    double scale = 0.0;
    for (double c : traj.coefficients()) scale = std::max(scale, std::abs(c));
    for (int k = 0; k < 6; ++k) {
      qp_gap = std::max(qp_gap, std::abs(qp[k] - traj.coefficients()[k]) /
                                    std::max(1e-12, scale));
    }
  }
  return {"quintic boundary conditions", worst < 1e-8 && qp_gap < 1e-6,
          "max residual " + Fmt(worst) + ", coefficient gap to the QP oracle " +
              Fmt(qp_gap)};
}

CheckResult ControllerEquilibrium() {
  const longctl::ControllerParams p;
  const longctl::GapMeasurement at_gap{20.0, p.safety_distance, true};
  const double follow = longctl::AccelCommand(20.0, at_gap, p, 33.0);
  const double free = longctl::AccelCommand(25.0, {}, p, 25.0);
  const double close =
      longctl::AccelCommand(30.0, {10.0, 1.0, true}, p, 33.0);
  const bool ok = std::abs(follow) < 1e-12 && std::abs(free) < 1e-12 &&
                  close == p.a_min;
  return {"controller equilibrium", ok,
          "follow " + Fmt(follow) + ", free " + Fmt(free) + ", closing " +
              Fmt(close)};
}

CheckResult ResetDeterminism() {
  for (auto kind : {env::ScenarioKind::kOvertake, env::ScenarioKind::kOncoming}) {
    env::ScenarioConfig c;
    c.kind = kind;
    for (std::uint64_t seed : {1ULL, 99ULL, 123456789ULL}) {
      const env::WorldState a = env::Reset(c, seed);
      const env::WorldState b = env::Reset(c, seed);
      if (!(a == b) || env::CollisionCheck(a)) {
        return {"reset determinism", false,
                std::string(env::ToString(kind)) + " seed " + std::to_string(seed)};
      }
    }
  }
  return {"reset determinism", true, "both scenarios, 3 seeds"};
}

}  // namespace

Fault ParseFault(std::string_view name) {
  if (name == "none" || name.empty()) return Fault::kNone;
  if (name == "backward-sign") return Fault::kBackwardSign;
  throw ConfigError("unknown fault '" + std::string(name) +
                    "' (expected none or backward-sign)");
}

std::vector<CheckResult> RunChecks(Fault fault) {
  std::vector<CheckResult> results;
  auto guarded = [&](const std::string& name, auto&& check) {
    try {
      results.push_back(check());
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("list network gradients", [&] {
    return GradientCheck("list network gradients",
                         nn::MakeListArchitecture(6, 6, 8, 3), fault);
  });
  guarded("grid network gradients", [&] {
    return GradientCheck("grid network gradients",
                         nn::MakeGridArchitecture(2, 24, 6, 8), fault);
  });
  guarded("action decode bijection", DecodeBijection);
  guarded("quintic boundary conditions", QuinticBoundaries);
  guarded("controller equilibrium", ControllerEquilibrium);
  guarded("reset determinism", ResetDeterminism);
  return results;
}

}  // namespace lcdqn::verify
