#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sgb/estimator.hpp"
#include "sgb/grid.hpp"
#include "sgb/noise.hpp"
#include "sgb/problem.hpp"

namespace sgb {

/// Everything needed to reproduce one experiment. Serialized as flat `key = value`
/// lines; blank lines and `#` comments are ignored, unknown keys are errors.
struct ExperimentConfig {
  std::string name = "custom";
  /// Runner: one of preset_list().
  std::string experiment = "case1-exponents";

  ProblemSpec spec;
  /// n_t = 0 means dt = dt_factor * dx^2.
  GridSpec grid;
  double dt_factor = 0.25;

  std::size_t n_paths = 200;
  std::uint64_t master_seed = 20240611;
  std::vector<double> stop_levels;
  NoiseConstruction noise = NoiseConstruction::rectangle_increment;
  int series_modes = 0;

  // Estimator settings.
  double q = 2.0;
  double q_check = 1.0;
  std::vector<int> space_lags;
  std::vector<int> time_lags;
  int record_stride = 1;
  /// t0 = burn_in_fraction * t_end.
  double burn_in_fraction = 0.1;
  /// Distance kept between the window and the spatial boundary.
  double window_margin = 1.0;
  double tolerance = 0.05;
  std::size_t bootstrap = 400;

  // Parameter sweeps.
  std::vector<double> lambdas;
  std::vector<double> lambda0s;
  std::vector<double> cutoff_levels;

  /// Fields drawn by noise-validate.
  std::size_t n_fields = 10000;

  int threads = 0;
  std::filesystem::path output_dir = "out";
  bool dump_trajectories = false;

  /// Grid with n_t resolved.
  GridSpec resolved_grid() const;
  /// Estimator settings for one direction with the window derived from the grid.
  EstimatorSettings estimator(Direction d) const;

  /// Canonical text; parse(serialize(c)) == c.
  std::string serialize() const;
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// FNV-1a of the canonical text without run-only keys (threads, output_dir).
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

/// Named presets in a fixed order.
std::vector<std::string> preset_list();
/// Throws ConfigError for unknown names.
ExperimentConfig preset(std::string_view name);

}  // namespace sgb
