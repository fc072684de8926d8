#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "pinnctl/cli/config.hpp"

namespace pinnctl::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

/// Output directory of a run: config value, else $PINNCTL_OUTPUT_ROOT (or
/// "runs") / "<problem>-<engine>-seed<seed>".
std::string output_dir(const RunConfig& rc);

/// Runs one engine and writes its artifacts; returns the summary record.
/// Throws on failure.
nlohmann::json run_engine(const RunConfig& rc, const std::string& dir, std::ostream& log);

/// run_engine with the manifest, summary and error record on disk.
int run(const RunConfig& rc, std::ostream& log);

/// Maps an exception to an exit code and a machine-readable record.
int classify(const std::exception& e, nlohmann::json& record);

/// Tidy CSVs for plotting under <run_dir>/plotdata. Throws on incomplete runs.
void export_plotdata(const std::string& run_dir, std::ostream& log);

/// Relative L2 error of a state network against a closed form on an n x n
/// uniform grid including the edges.
double relative_l2(const problems::ProblemSpec& p, const net::MlpParams& state, int n = 100);

}  // namespace pinnctl::cli
