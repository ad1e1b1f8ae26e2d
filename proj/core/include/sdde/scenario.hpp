#pragma once

#include <iosfwd>
#include <string>

namespace sdde {

/// Parse, validate and execute a scenario file (text key-value format or the
/// JSON encoding of the same schema). Writes the artifacts named in the
/// scenario's [output] section. Returns the process exit code:
///   0  action completed / all checks passed (warnings allowed)
///   1  a check failed
///   2  configuration error (parse, validation, unknown keys)
/// Progress and errors go to `log`.
int run_scenario_file(const std::string& file, std::ostream& log);

/// Calibration pass: runs the scenario's ensemble, measures the observed
/// violation scale and writes the disc_tol / viol_tol constants JSON next to
/// the other outputs. Same exit-code contract.
int calibrate_scenario_file(const std::string& file, std::ostream& log);

}  // namespace sdde
