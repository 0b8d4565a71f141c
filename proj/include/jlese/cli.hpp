#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jlese::cli {

/// Runs the command line with argv-style arguments (args[0] is the program
/// name). CSV goes to --out or `out`; diagnostics go to `err`.
/// Exit codes: 0 ok, 2 usage/config, 3 data, 4 solver/invariant failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jlese::cli
