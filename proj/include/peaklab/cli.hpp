#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace peaklab {

/// Entry point of the `peaklab` command. args[0] is the program name.
/// Returns 0 iff the run succeeded and every asserted property held, 1 on
/// failed properties or invalid input, 2 for an unknown subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace peaklab
