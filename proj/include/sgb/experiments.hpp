#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>
#include "sgb/config.hpp"
#include "sgb/noise.hpp"

namespace sgb {

inline constexpr const char* kCodeVersion = SGB_VERSION;

/// Exit statuses of run_experiment and the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_runtime = 3 };

/// The ten grid-aligned rectangle pairs probed by noise-validate. They lie in
/// [0,4] x [x_min, x_min + 4] and need dt and dx dividing 1/64.
std::vector<RectPair> default_probe_pairs(const GridSpec& grid);

/// Runs the experiment named by `cfg.experiment` and returns its report. The report
/// carries a top-level "pass" flag and the config hash, seed and code version.
/// Throws on invalid configurations.
nlohmann::json compute_experiment(const ExperimentConfig& cfg);

/// compute_experiment plus artifacts under output_dir/name: report.json, config.txt,
/// and any CSV or trajectory files the runner produces. Errors are reported on `log`
/// and mapped to exit codes.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Human-readable rendering of a report directory (used by `sgb report`).
std::string render_report(const std::filesystem::path& dir);

}  // namespace sgb
