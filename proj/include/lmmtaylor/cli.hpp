#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lmmtaylor {

/// Exit codes of the command line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitToleranceFailure = 1,  // reproduce: at least one cell outside tolerance
    kExitConfigError = 2,       // unreadable config, bad field or bad flag
    kExitNumericError = 3,      // singular correlation or covariance, etc.
};

/// Runs `lmmtaylor <command> ...`. `args` excludes the program name. The CSV
/// goes to --out when given, otherwise to `out` with the summary on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmmtaylor
