#pragma once

#include <string>
#include <vector>

namespace gapfit::cli {

enum ExitCode : int {
  kSuccess = 0,
  kIoFailure = 1,
  kUsageFailure = 2,
  kNumericalFailure = 3,
};

// Runs one command line. `args` excludes the program name. Errors are
// reported on stderr and mapped to an ExitCode.
int run(const std::vector<std::string>& args);

int main(int argc, char** argv);

}  // namespace gapfit::cli
