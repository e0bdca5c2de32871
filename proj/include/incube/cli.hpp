#pragma once

#include <ostream>

namespace incube {

// Exit statuses of the incube command.
enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitValidation = 3,  // Error-severity violations under --strict
  kExitVersion = 4,     // snapshot format or codebook version mismatch
};

// Entry point of the incube command. Data goes to `out`, diagnostics to
// `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace incube
