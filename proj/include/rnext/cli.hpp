#pragma once

#include <exception>
#include <ostream>

#include "rnext/config.hpp"

namespace rnext {

// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitPrecondition = 2;
inline constexpr int kExitSurgery = 3;
inline constexpr int kExitVerification = 4;

int exit_code_for(const std::exception& e);

// Runs one validated command. Artifacts go to the configured paths, or to `out` when no path
// is set. Library errors propagate.
int run(const RunConfig& config, std::ostream& out);

// parse_config, run and error reporting with the exit code mapping.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rnext
