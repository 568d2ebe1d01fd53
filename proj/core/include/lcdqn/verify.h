#ifndef LCDQN_VERIFY_H_
#define LCDQN_VERIFY_H_

#include <string>
#include <string_view>
#include <vector>

// Fast self-checks of the numerical core, runnable from the command line.
namespace lcdqn::verify {

// Deliberate defects used to confirm that the checks can fail.
enum class Fault { kNone, kBackwardSign };

Fault ParseFault(std::string_view name);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> RunChecks(Fault fault = Fault::kNone);

}  // namespace lcdqn::verify

#endif  // LCDQN_VERIFY_H_
