#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pnmc::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kHolds = 0,
  kFails = 1,
  kInconclusive = 2,
  kUsageError = 3,  // malformed input, bad flags, violated gadget preconditions
  kOtherError = 4,  // I/O failures, disagreeing side inputs, internal errors
};

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pnmc::cli
