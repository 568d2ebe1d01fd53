#ifndef LCDQN_DQN_H_
#define LCDQN_DQN_H_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "lcdqn/nn.h"
#include "lcdqn/rng.h"

// Double / dueling deep Q-learning on top of lcdqn::nn.
namespace lcdqn::dqn {

struct Transition {
  std::vector<double> obs;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

// Column-per-transition view of a sampled minibatch.
struct Batch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd next_obs;
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  std::vector<bool> terminal;

  int size() const { return static_cast<int>(actions.size()); }
  static Batch FromTransitions(const std::vector<Transition>& transitions);
};

// FIFO ring of transitions with uniform sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int action_count);

  void Push(const Transition& t);
  // i-th oldest stored transition.
  Transition At(std::size_t i) const;
  // n draws with replacement. Throws NotReadyError if size() < n.
  Batch Sample(std::size_t n, Rng& rng) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }

  // Binary snapshot for exact training resume.
  void Save(std::ostream& os) const;
  static ReplayBuffer Load(std::istream& is);

 private:
  std::size_t Physical(std::size_t i) const;
  void Gather(std::size_t slot, int column, Batch& batch) const;

  std::size_t capacity_;
  int obs_dim_;
  int action_count_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;  // next slot to write
  std::vector<double> obs_;
  std::vector<double> next_obs_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> terminal_;
};

// Linear anneal from start to end over decay_steps, then held at end.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  std::int64_t decay_steps = 150000;

  double At(std::int64_t step) const;
  bool operator==(const EpsilonSchedule&) const = default;
};

struct DqnConfig {
  double gamma = 0.99;
  int batch_size = 32;
  std::int64_t target_sync_interval = 20000;  // environment steps
  double learning_rate = 1e-3;
  std::size_t buffer_capacity = 100000;
  std::size_t train_start_size = 1000;
  int train_interval = 1;  // environment steps per gradient step
  bool double_dqn = true;
  EpsilonSchedule epsilon;

  void Validate() const;
  bool operator==(const DqnConfig&) const = default;
};

// Index of the largest entry; ties go to the lowest index.
int Argmax(const Eigen::Ref<const Eigen::VectorXd>& values);

// Uniform random action with probability epsilon, greedy otherwise. Always
// consumes exactly one uniform draw, plus one more when exploring.
int SelectAction(const nn::NetworkParams& params, const std::vector<double>& obs,
                 double epsilon, Rng& rng);

// y = r for terminal transitions, otherwise
//   double:  r + gamma * Q_target(s', argmax_a Q_main(s', a))
//   plain:   r + gamma * max_a Q_target(s', a)
Eigen::VectorXd TdTargets(const nn::NetworkParams& main,
                          const nn::NetworkParams& target, const Batch& batch,
                          double gamma, bool double_dqn = true);

struct TrainStepResult {
  double loss = 0.0;
  nn::Gradients grads;
};

// Gradient of mean 0.5 (Q_main(s, a) - y)^2 with y held constant.
TrainStepResult LossAndGradients(const nn::NetworkParams& main,
                                 const nn::NetworkParams& target,
                                 const Batch& batch, double gamma,
                                 bool double_dqn = true);

// One Adam step on the TD loss; returns the pre-update loss. Throws
// TrainingError on a non-finite loss or gradient without modifying `main`.
double TrainStep(nn::NetworkParams& main, nn::AdamState& adam,
                 const nn::NetworkParams& target, const Batch& batch,
                 double gamma, bool double_dqn = true);

// target <- main. Throws UsageError on an architecture mismatch.
void SyncTarget(const nn::NetworkParams& main, nn::NetworkParams& target);

}  // namespace lcdqn::dqn

#endif  // LCDQN_DQN_H_
