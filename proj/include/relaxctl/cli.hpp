#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace relaxctl::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kValidationError = 2,
  kSimulationError = 3,
  kCheckFailed = 4,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relaxctl::cli
