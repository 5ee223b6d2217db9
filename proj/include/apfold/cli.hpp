#pragma once

#include <ostream>
#include <string>

namespace apfold::cli {

enum ExitCode : int { ok = 0, solver_error = 1, verification_failed = 2 };

/// Entry point of the command-line tool: `apfold <eig|fiber|solve|scan|verify>
/// --config FILE [options]`. Writes artifacts and a summary JSON into the
/// output directory, echoes the summary on `out`, diagnostics on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

}  // namespace apfold::cli
