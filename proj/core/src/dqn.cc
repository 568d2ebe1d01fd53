#include "lcdqn/dqn.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "lcdqn/errors.h"

namespace lcdqn::dqn {
namespace {

template <typename T>
void WritePod(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ConfigError("truncated replay buffer snapshot");
  return value;
}

template <typename T>
void WriteVector(std::ostream& os, const std::vector<T>& v) {
  WritePod<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> ReadVector(std::istream& is) {
  const auto n = ReadPod<std::uint64_t>(is);
  std::vector<T> v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(T)));
  if (!is) throw ConfigError("truncated replay buffer snapshot");
  return v;
}

constexpr std::uint32_t kBufferMagic = 0x4c435242;  // "LCRB"

}  // namespace

Batch Batch::FromTransitions(const std::vector<Transition>& transitions) {
  Batch b;
  const int n = static_cast<int>(transitions.size());
  if (n == 0) return b;
  const int dim = static_cast<int>(transitions.front().obs.size());
  b.obs.resize(dim, n);
  b.next_obs.resize(dim, n);
  b.rewards.resize(n);
  for (int i = 0; i < n; ++i) {
    const Transition& t = transitions[i];
    b.obs.col(i) = Eigen::Map<const Eigen::VectorXd>(t.obs.data(), dim);
    b.next_obs.col(i) = Eigen::Map<const Eigen::VectorXd>(t.next_obs.data(), dim);
    b.actions.push_back(t.action);
    b.rewards(i) = t.reward;
    b.terminal.push_back(t.terminal);
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int action_count)
    : capacity_(capacity), obs_dim_(obs_dim), action_count_(action_count) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be > 0");
  if (obs_dim <= 0 || action_count <= 0) {
    throw ConfigError("replay buffer needs positive observation/action sizes");
  }
}

void ReplayBuffer::Push(const Transition& t) {
  if (static_cast<int>(t.obs.size()) != obs_dim_ ||
      static_cast<int>(t.next_obs.size()) != obs_dim_) {
    throw UsageError("transition observation size does not match the buffer");
  }
  if (t.action < 0 || t.action >= action_count_) {
    throw UsageError("transition action " + std::to_string(t.action) +
                     " outside the action space");
  }
  const std::size_t slot = cursor_;
  if (size_ < capacity_) {
    obs_.insert(obs_.end(), t.obs.begin(), t.obs.end());
    next_obs_.insert(next_obs_.end(), t.next_obs.begin(), t.next_obs.end());
    actions_.push_back(t.action);
    rewards_.push_back(t.reward);
    terminal_.push_back(t.terminal ? 1 : 0);
    ++size_;
  } else {
    std::copy(t.obs.begin(), t.obs.end(), obs_.begin() + slot * obs_dim_);
    std::copy(t.next_obs.begin(), t.next_obs.end(),
              next_obs_.begin() + slot * obs_dim_);
    actions_[slot] = t.action;
    rewards_[slot] = t.reward;
    terminal_[slot] = t.terminal ? 1 : 0;
  }
  cursor_ = (slot + 1) % capacity_;
}

std::size_t ReplayBuffer::Physical(std::size_t i) const {
  return size_ < capacity_ ? i : (cursor_ + i) % capacity_;
}

Transition ReplayBuffer::At(std::size_t i) const {
  if (i >= size_) throw UsageError("replay index out of range");
  const std::size_t slot = Physical(i);
  Transition t;
  t.obs.assign(obs_.begin() + slot * obs_dim_,
               obs_.begin() + (slot + 1) * obs_dim_);
  t.next_obs.assign(next_obs_.begin() + slot * obs_dim_,
                    next_obs_.begin() + (slot + 1) * obs_dim_);
  t.action = actions_[slot];
  t.reward = rewards_[slot];
  t.terminal = terminal_[slot] != 0;
  return t;
}

void ReplayBuffer::Gather(std::size_t slot, int column, Batch& batch) const {
  batch.obs.col(column) =
      Eigen::Map<const Eigen::VectorXd>(obs_.data() + slot * obs_dim_, obs_dim_);
  batch.next_obs.col(column) = Eigen::Map<const Eigen::VectorXd>(
      next_obs_.data() + slot * obs_dim_, obs_dim_);
  batch.actions[column] = actions_[slot];
  batch.rewards(column) = rewards_[slot];
  batch.terminal[column] = terminal_[slot] != 0;
}

Batch ReplayBuffer::Sample(std::size_t n, Rng& rng) const {
  if (size_ < n || n == 0) {
    throw NotReadyError("replay buffer holds " + std::to_string(size_) +
                        " transitions, " + std::to_string(n) + " requested");
  }
  Batch batch;
  const int count = static_cast<int>(n);
  batch.obs.resize(obs_dim_, count);
  batch.next_obs.resize(obs_dim_, count);
  batch.actions.assign(count, 0);
  batch.rewards.resize(count);
  batch.terminal.assign(count, false);
  for (int i = 0; i < count; ++i) {
    Gather(static_cast<std::size_t>(UniformIndex(rng, size_)), i, batch);
  }
  return batch;
}

void ReplayBuffer::Save(std::ostream& os) const {
  WritePod(os, kBufferMagic);
  WritePod<std::uint64_t>(os, capacity_);
  WritePod<std::int32_t>(os, obs_dim_);
  WritePod<std::int32_t>(os, action_count_);
  WritePod<std::uint64_t>(os, size_);
  WritePod<std::uint64_t>(os, cursor_);
  WriteVector(os, obs_);
  WriteVector(os, next_obs_);
  WriteVector(os, actions_);
  WriteVector(os, rewards_);
  WriteVector(os, terminal_);
}

ReplayBuffer ReplayBuffer::Load(std::istream& is) {
  if (ReadPod<std::uint32_t>(is) != kBufferMagic) {
    throw ConfigError("not a replay buffer snapshot");
  }
  const auto capacity = ReadPod<std::uint64_t>(is);
  const auto obs_dim = ReadPod<std::int32_t>(is);
  const auto actions = ReadPod<std::int32_t>(is);
  ReplayBuffer buffer(capacity, obs_dim, actions);
  buffer.size_ = ReadPod<std::uint64_t>(is);
  buffer.cursor_ = ReadPod<std::uint64_t>(is);
  buffer.obs_ = ReadVector<double>(is);
  buffer.next_obs_ = ReadVector<double>(is);
  buffer.actions_ = ReadVector<int>(is);
  buffer.rewards_ = ReadVector<double>(is);
  buffer.terminal_ = ReadVector<std::uint8_t>(is);
  if (buffer.actions_.size() != buffer.size_ ||
      buffer.obs_.size() != buffer.size_ * obs_dim) {
    throw ConfigError("inconsistent replay buffer snapshot");
  }
  return buffer;
}

double EpsilonSchedule::At(std::int64_t step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  if (step <= 0) return start;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + frac * (end - start);
}

void DqnConfig::Validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("dqn: gamma must be in (0, 1]");
  if (batch_size < 1) throw ConfigError("dqn: batch_size must be >= 1");
  if (target_sync_interval < 1) {
    throw ConfigError("dqn: target_sync_interval must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("dqn: learning_rate must be > 0");
  if (buffer_capacity < static_cast<std::size_t>(batch_size)) {
    throw ConfigError("dqn: buffer_capacity must be >= batch_size");
  }
  if (train_interval < 1) throw ConfigError("dqn: train_interval must be >= 1");
  if (!(epsilon.start >= 0.0 && epsilon.start <= 1.0 && epsilon.end >= 0.0 &&
        epsilon.end <= 1.0)) {
    throw ConfigError("dqn: epsilon endpoints must lie in [0, 1]");
  }
}

int Argmax(const Eigen::Ref<const Eigen::VectorXd>& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return best;
}

int SelectAction(const nn::NetworkParams& params, const std::vector<double>& obs,
                 double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw UsageError("epsilon must lie in [0, 1]");
  }
  const int actions = params.arch.OutputSize();
  if (UniformUnit(rng) < epsilon) {
    return static_cast<int>(UniformIndex(rng, actions));
  }
  return Argmax(nn::PredictOne(params, obs));
}

Eigen::VectorXd TdTargets(const nn::NetworkParams& main,
                          const nn::NetworkParams& target, const Batch& batch,
                          double gamma, bool double_dqn) {
  if (batch.size() == 0) throw UsageError("TdTargets: empty batch");
  const Eigen::MatrixXd q_target = nn::Predict(target, batch.next_obs);
  Eigen::MatrixXd q_main;
  if (double_dqn) q_main = nn::Predict(main, batch.next_obs);

  Eigen::VectorXd y(batch.size());
  for (int i = 0; i < batch.size(); ++i) {
    if (batch.terminal[i]) {
      y(i) = batch.rewards(i);
      continue;
    }
    const int a = double_dqn ? Argmax(q_main.col(i)) : Argmax(q_target.col(i));
    y(i) = batch.rewards(i) + gamma * q_target(a, i);
  }
  return y;
}

TrainStepResult LossAndGradients(const nn::NetworkParams& main,
                                 const nn::NetworkParams& target,
                                 const Batch& batch, double gamma,
                                 bool double_dqn) {
  const Eigen::VectorXd y = TdTargets(main, target, batch, gamma, double_dqn);
  const nn::ForwardResult fwd = nn::Forward(main, batch.obs);
  const int n = batch.size();
  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(fwd.q.rows(), n);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double err = fwd.q(batch.actions[i], i) - y(i);
    loss += 0.5 * err * err;
    dq(batch.actions[i], i) = err / n;
  }
  loss /= n;
  if (!std::isfinite(loss)) {
    throw TrainingError("non-finite TD loss (" + std::to_string(loss) + ")");
  }
  return {loss, nn::Backward(main, fwd.cache, dq)};
}

double TrainStep(nn::NetworkParams& main, nn::AdamState& adam,
                 const nn::NetworkParams& target, const Batch& batch,
                 double gamma, bool double_dqn) {
  TrainStepResult r = LossAndGradients(main, target, batch, gamma, double_dqn);
  nn::AdamStep(main, r.grads, adam);
  return r.loss;
}

void SyncTarget(const nn::NetworkParams& main, nn::NetworkParams& target) {
  target.CopyFrom(main);
}

}  // namespace lcdqn::dqn
