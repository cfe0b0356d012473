#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmm::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kConvergenceError = 3,
  kSimulationError = 4,
};

/// Runs `mmm <args...>` in-process. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace mmm::cli
