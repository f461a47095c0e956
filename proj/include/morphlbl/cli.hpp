#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace morphlbl {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

// Runs one command. `args` excludes the program name. Normal output goes
// to `out`; failures print a single `error: <code>: <message>` line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace morphlbl
