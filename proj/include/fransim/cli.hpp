#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fransim {

/// Dispatch one command line (without the program name).  Writes results to
/// `out`, a single-line diagnostic to `err` on failure.  Returns 0 on
/// success, 1 for configuration/usage errors, 2 for runtime errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fransim
