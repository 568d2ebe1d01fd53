#ifndef LCDQN_ERRORS_H_
#define LCDQN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace lcdqn {

// Invalid or infeasible configuration (scenario, observation, file contents).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Ill-conditioned or singular numerical problem.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during optimization.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replay buffer holds fewer transitions than requested.
class NotReadyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lcdqn

#endif  // LCDQN_ERRORS_H_
