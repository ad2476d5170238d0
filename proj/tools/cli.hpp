#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gcsim::cli {

/// Process exit status per failure class.
enum ExitCode : int {
    ok = 0,
    internal_error = 1,
    usage_error = 2,
    config_error = 3,
    solver_error = 4,
    calibration_error = 5,
    io_error = 6,
    analysis_error = 7,
    tuning_error = 8,
};

/// Runs one subcommand. `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gcsim::cli
