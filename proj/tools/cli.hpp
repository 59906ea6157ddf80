#pragma once

#include <ostream>

namespace mflqg::cli {

// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kIoOrParse = 1,
  kValidation = 2,
  kVerificationFailed = 3,
};

// Entry point for the `mflqg` tool. Subcommands: solve, simulate, verify,
// evaluate, preset-heater.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mflqg::cli
