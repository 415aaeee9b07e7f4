#ifndef HJLAB_CLI_HPP
#define HJLAB_CLI_HPP

#include "hjlab/io.hpp"

#include <iosfwd>

namespace hjlab {

enum ExitCode : int {
  kExitPass = 0,
  kExitThresholdFail = 1,
  kExitConfigError = 2,
};

/// Each command writes its artifacts under config.output_dir and reports
/// diagnostics on `err`. fits.json is merged section by section, so
/// commands run separately accumulate into one file.
int cmd_audit(const RunConfig& config, std::ostream& err);
int cmd_solve(const RunConfig& config, std::ostream& err);
int cmd_trace(const RunConfig& config, std::ostream& err);
int cmd_probe(const RunConfig& config, std::ostream& err);
int cmd_all(const RunConfig& config, std::ostream& err);

/// `hjlab <audit|solve|trace|probe|all> --config <path> [--out <dir>]
/// [--seed <u64>] [--threads <n>] [--field-format csv|binary]`.
int run_cli(int argc, const char* const* argv);

}  // namespace hjlab

#endif  // HJLAB_CLI_HPP
