#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edskit {

// Exit codes of the command-line tool.
enum ExitCode : int { Success = 0, MathFailure = 1, InputError = 2 };

// Runs `edskit <args...>`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace edskit
