#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qstab/cli/config.hpp"
#include "qstab/cli/report.hpp"

namespace qstab::cli {

enum ExitCode : int { kSuccess = 0, kVerificationFailure = 1, kConfigError = 2, kNonConvergence = 3 };

struct CommandResult {
  int exit_code = kSuccess;
  std::vector<std::string> files;  // written, relative to the output directory
  std::vector<std::string> warnings;
  std::string error;
  std::vector<ReportRow> rows;  // verify only
};

// Each command creates config.output.dir and writes its reports there.
// Library errors are mapped to exit codes: invalid input, degenerate source
// and non-coercive potentials to kConfigError, non-convergence to
// kNonConvergence.
CommandResult cmd_energy(const RunConfig& config);
CommandResult cmd_optimize(const RunConfig& config);
CommandResult cmd_verify(const RunConfig& config);
CommandResult cmd_decay(const RunConfig& config);

// Stability and inequality rows of a verify run, ordered by instance id.
// Instance k draws from Rng(derive_seed(seed, k)), so rows do not depend on
// the thread count.
std::vector<ReportRow> run_verify_sweep(const RunConfig& config, nlohmann::json* summary = nullptr);

// Entry point of the qstab tool: `qstab <energy|optimize|verify|decay>
// [--config path] [--out dir] [--seed n] [--threads n]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qstab::cli
