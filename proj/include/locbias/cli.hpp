#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace locbias {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFaults = 1,        // faults found, or a replay failed as recorded
  kExitConfig = 2,        // bad flags, config, input file, or unknown harness
  kExitUnwritable = 3,    // an output file could not be written
  kExitMismatch = 4,      // replay signature differs from the recorded one
};

// Runs the command line `args` (without the program name). Primary output
// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace locbias
