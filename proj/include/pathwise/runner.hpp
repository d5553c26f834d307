#pragma once

#include "pathwise/run_config.hpp"

#include <iosfwd>
#include <string>

namespace pathwise {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNoConvergence = 3 };

/// Runs cfg.experiment, writing artifacts into cfg.out_dir. Progress goes to `log`.
/// Verification failures are reported inside the JSON and do not change the exit code.
int run(const RunConfig& cfg, std::ostream& log);

/// JSON text of the verify-all report (deterministic given the config).
std::string verify_all_report(const RunConfig& cfg, std::ostream& log);

}  // namespace pathwise
