#pragma once

// Command dispatch for the multispin tool. One JSON report on `out`,
// diagnostics on `err`.

#include <iosfwd>
#include <string>
#include <vector>

namespace multispin {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitInadmissible = 3,
  kExitBudget = 4,
  kExitParse = 5,
};

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace multispin
