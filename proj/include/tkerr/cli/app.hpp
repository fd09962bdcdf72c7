#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tkerr::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitPhysics = 3,
  kExitIntegration = 4,
};

/// Entry point of `tkerr`. `args` excludes the program name. Progress goes
/// to `out`; failures produce one JSON line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tkerr::cli
