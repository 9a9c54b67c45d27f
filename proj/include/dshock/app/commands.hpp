#pragma once

#include <iosfwd>
#include <json.hpp>

#include "dshock/app/config.hpp"
#include "dshock/shock_model.hpp"

namespace dshock::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNumeric = 2,
  kExitComparisonFail = 3,
};

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;
};

/// Grid used when the configuration has none: 200 points from
/// max(mean - 4 sd, mean / 1000) to mean + 8 sd.
GridSpec default_grid(const ShockModel& model);

/// Moments from every available method, the normal approximation and the
/// curve table. Writes summary.json and curves.csv.
CommandResult cmd_analyze(const RunConfig& config, std::ostream& log);

/// Monte Carlo run of the simulated model. Writes simulation.json and
/// ecdf.csv.
CommandResult cmd_simulate(const RunConfig& config, std::ostream& log);

/// Simulation against the analysed model: moment deltas in standard-error
/// units per method and KS statistics. Writes compare.json; exit code 3 when
/// any verdict fails.
CommandResult cmd_compare(const RunConfig& config, std::ostream& log);

/// Density and cdf at a single t by transform inversion. Writes nothing.
CommandResult cmd_invert(const RunConfig& config, double t, std::ostream& log);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dshock::app
