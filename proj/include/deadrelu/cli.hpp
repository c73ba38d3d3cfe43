#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace deadrelu {

/// Runs the command line front end. args[0] is the program name.
/// Returns 0 on success, 2 on usage errors, 1 on runtime or I/O failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deadrelu
