#pragma once
// Experiment pipelines and the command-line entry point.

#include <iosfwd>
#include <string>
#include <vector>

#include "arrival/runner/config.hpp"
#include "arrival/runner/result.hpp"

namespace arrival::runner {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

ResultRecord run(const ExperimentSettings& settings, const json& echo);

struct ScanOutcome {
  ResultRecord summary;
  std::vector<ResultRecord> points;  // in sweep order
};

// Points run on up to `workers` threads; the outcome does not depend on it.
ScanOutcome run_scan(const ScanSettings& scan, const json& echo, unsigned workers);

// Resolve, validate, run and write. Throws ConfigError, PreconditionError,
// NumericalError.
void execute(ExperimentKind kind, const json& file, const std::vector<std::string>& overrides,
             const std::string& out_dir, unsigned workers, std::ostream& log);

// `arrival <kind> --config <path> [--set k=v ...] [--out dir] [--workers N]`
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace arrival::runner
