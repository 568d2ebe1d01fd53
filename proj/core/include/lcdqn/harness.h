#ifndef LCDQN_HARNESS_H_
#define LCDQN_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lcdqn/dqn.h"
#include "lcdqn/env.h"
#include "lcdqn/nn.h"
#include "lcdqn/observe.h"
#include "lcdqn/plan.h"
#include "lcdqn/run_config.h"

// Closed-loop episodes, training with periodic greedy evaluation, and
// checkpoint selection.
namespace lcdqn::harness {

// Maps an encoded observation to an action index.
using Policy = std::function<int(const std::vector<double>& obs)>;
// Receives every transition of a training episode as it happens.
using TransitionSink = std::function<void(const dqn::Transition&)>;

// Deterministic argmax policy over a parameter snapshot.
Policy GreedyPolicy(const nn::NetworkParams& params);

struct EpisodeSetup {
  env::ScenarioConfig scenario;
  observe::ObservationSpec observation;
  plan::ActionSpace actions;
  double reward_scale = 1.0;
};

EpisodeSetup MakeSetup(const TrainRunConfig& config);

struct StepRecord {
  int step = 0;
  env::VehicleState ego;
  std::vector<env::VehicleState> others;
  env::LateralSample lateral;
  int action = -1;
  env::StepOutcome outcome;
  env::EpisodeStatus status = env::EpisodeStatus::kRunning;
};

struct EpisodeResult {
  double episode_return = 0.0;  // undiscounted, unscaled
  int steps = 0;
  env::EpisodeStatus outcome = env::EpisodeStatus::kRunning;
  double avg_velocity = 0.0;
  // Initial state (step 0, no action) followed by one record per step, when
  // recording.
  std::vector<StepRecord> trace;
};

// Tracks the active lateral trajectory. A new quintic is fitted from the
// current lateral state whenever the chosen action changes; otherwise the
// ego keeps following the one it has.
class LaneChangeDriver {
 public:
  // Returns the ego's commanded longitudinal acceleration and lateral sample
  // for this step.
  struct Command {
    double accel = 0.0;
    env::LateralSample lateral;
  };
  Command Plan(const env::WorldState& world, const env::ScenarioConfig& scenario,
               const plan::ActionSpace& actions, int action);

  const std::optional<plan::Trajectory>& trajectory() const { return traj_; }

 private:
  std::optional<plan::Trajectory> traj_;
  int active_action_ = -1;
};

// Runs one episode from `world` until it terminates. Success and collision
// transitions are marked terminal; a timeout only ends the episode, since
// the observation carries no clock.
EpisodeResult RunEpisode(const Policy& policy, env::WorldState world,
                         const EpisodeSetup& setup, bool record,
                         const TransitionSink& sink = {});

struct EvalReport {
  double completion_rate = 0.0;  // %
  double collision_rate = 0.0;   // %
  double avg_reward = 0.0;
  double avg_velocity = 0.0;
  int n_episodes = 0;
  std::string policy_id;
};

// Greedy rollouts on seeds seed_base + i for i in [0, n_episodes).
EvalReport Evaluate(const nn::NetworkParams& params, const EpisodeSetup& setup,
                    int n_episodes, std::uint64_t seed_base);
// Aggregates per-episode results; independent of their order.
EvalReport Aggregate(const std::vector<EpisodeResult>& episodes);

// Seed streams: training episodes, periodic evaluation and held-out
// evaluation never share a seed.
std::uint64_t TrainEpisodeSeed(std::uint64_t run_seed, std::int64_t episode);
std::uint64_t EvalSeedBase(std::uint64_t run_seed);
std::uint64_t HeldOutSeedBase(std::uint64_t run_seed);

struct EvalPoint {
  int episode = 0;
  std::int64_t env_steps = 0;
  double epsilon = 0.0;
  EvalReport report;
  std::string checkpoint_path;  // relative to the run directory
};

std::string MetricsLine(const EvalPoint& point);
EvalPoint ParseMetricsLine(const std::string& line);
std::vector<EvalPoint> ReadMetrics(const std::filesystem::path& path);

// Lexicographic: highest completion, lowest collision, highest velocity,
// highest reward; the earliest entry wins full ties. Returns an index.
// Throws UsageError on an empty list.
std::size_t SelectBest(const std::vector<EvalPoint>& points);

// Mutable state of one training run.
struct TrainerState {
  nn::NetworkParams main;
  nn::NetworkParams target;
  nn::AdamState adam;
  dqn::ReplayBuffer buffer;
  Rng rng;
  std::int64_t env_steps = 0;
  std::int64_t gradient_steps = 0;
  int episodes_done = 0;
  double last_loss = 0.0;
  std::uint64_t run_seed = 0;
  std::vector<EvalPoint> metrics;
  // Parameter snapshot per evaluation point, aligned with metrics.
  std::vector<nn::NetworkParams> checkpoints;
};

TrainerState MakeTrainerState(const TrainRunConfig& config,
                              std::uint64_t seed);
void SaveTrainerState(const TrainerState& state,
                      const std::filesystem::path& dir);
TrainerState LoadTrainerState(const TrainRunConfig& config,
                              const std::filesystem::path& dir);

struct TrainOptions {
  // When set, checkpoints and metrics.jsonl are written here.
  std::optional<std::filesystem::path> out_dir;
  // Continue from a state saved by SaveTrainerState.
  std::optional<std::filesystem::path> resume_from;
  bool save_final_state = false;
  std::function<void(const EvalPoint&)> on_eval;
};

struct TrainResult {
  std::vector<EvalPoint> metrics;
  std::vector<nn::NetworkParams> checkpoints;  // aligned with metrics
  std::int64_t env_steps = 0;
  std::int64_t gradient_steps = 0;
};

// Trains for config.total_episodes episodes (counting any resumed ones),
// evaluating greedily every config.eval_interval episodes. On a non-finite
// loss the state is saved to out_dir (when set) before TrainingError
// propagates.
TrainResult Train(const TrainRunConfig& config, std::uint64_t seed,
                  const TrainOptions& options = {});

}  // namespace lcdqn::harness

#endif  // LCDQN_HARNESS_H_
