#pragma once

#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace relosc::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kFault = 2, kConfigError = 3 };

/// Static checks for `validate`: expression parsing (with source positions),
/// instance invariants and the witness integral check. Never throws for
/// problems in the instance itself.
std::vector<Diagnostic> validate_config(const RunConfig& config);

/// Runs config.command, filling `out`. Returns the exit code for completed
/// runs; library errors propagate to the caller.
int run_command(const RunConfig& config, int threads, Artifacts& out);

}  // namespace relosc::cli
