#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kspod::cli {

/// Runs one subcommand (design, synth, train, predict, eval, pipeline).
/// args excludes the program name. Returns 0 on success, 1 on a domain
/// error, 2 on a usage or configuration error; diagnostics go to err as a
/// single line.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kspod::cli
