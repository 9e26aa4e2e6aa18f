#pragma once

#include <string>
#include <vector>

namespace olrsc {

// Entry point behind the `olrsc` binary.  Subcommands: synth, fit, cluster,
// eval, selftest.  Returns a process exit code.
int cli_main(const std::vector<std::string>& args);

// Quick invariant sweep used by the `selftest` subcommand; prints one line
// per check and returns true when all hold.
bool selftest();

}  // namespace olrsc
