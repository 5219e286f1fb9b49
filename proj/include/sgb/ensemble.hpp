#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>
#include "sgb/grid.hpp"
#include "sgb/noise.hpp"
#include "sgb/problem.hpp"
#include "sgb/solver.hpp"

namespace sgb {

/// Diagnostics kept from one path after its states are discarded.
struct PathDiagnostics {
  double sup_sqrt_mass = 0;      ///< sup_t ||u(t)||_{L1}^{1/2}
  double integrated_mass = 0;    ///< int_0^T ||u(t)||_{L1} dt (trapezoid)
  double initial_mass = 0;       ///< ||u0||_{L1}
  double sup_abs = 0;            ///< sup_{t,x} |u|
  double min_value = 0;          ///< min_{t >= burn-in, x} u
  double max_signed_mass_drift = 0;
  double sigma_max = 0;
  std::size_t negative_points = 0;
  bool exploded = false;
  std::vector<int> hitting_steps;  ///< per stop level; -1 when never reached
};

struct EnsembleOptions {
  std::size_t n_paths = 1;
  std::uint64_t master_seed = 0;
  std::vector<double> stop_levels;
  /// 0 = OpenMP default.
  int threads = 0;
  /// Diagnostics of positivity start at this time.
  double burn_in_time = 0.0;
  NoiseConstruction noise = NoiseConstruction::rectangle_increment;
  int series_modes = 0;  ///< 0 = n_x
  /// States recorded per path; only needed when on_path inspects them.
  EvolveOptions evolve;
  /// Called once per finished path from the worker that produced it; must be
  /// safe to call concurrently for distinct path indices.
  std::function<void(std::size_t, const SolutionPath&)> on_path;
};

struct Estimate {
  double mean = 0;
  double stderr_ = 0;
};

struct LevelExceedance {
  double R = 0;
  std::size_t count = 0;
  double p_exceed = 0;
  double stderr_ = 0;
};

/// Cross-path aggregates, reduced in path-index order.
struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t spec_hash = 0;
  GridSpec grid;
  Estimate sup_sqrt_mass;  ///< E sup_t ||u||_{L1}^{1/2}
  Estimate integrated_mass;
  Estimate sqrt_initial_mass;
  Estimate initial_mass;
  Estimate sup_abs;
  std::vector<LevelExceedance> per_level;
  double explosion_fraction = 0;
  double min_value = 0;
  double max_signed_mass_drift = 0;
  double sigma_max = 0;
  std::size_t negative_points = 0;
  double negativity_tolerance = 0;
  std::vector<PathDiagnostics> paths;

  nlohmann::json to_json() const;
};

/// Noise for path `index` of an ensemble with the given master seed.
std::unique_ptr<NoiseSource> ensemble_noise(const GridSpec& grid, const EnsembleOptions& options, std::size_t index);

/// Simulates one path of the ensemble.
SolutionPath simulate_path(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options,
                           std::size_t index);

/// Paths run in parallel over OpenMP threads.
EnsembleSummary run_ensemble(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options);
/// Serial reference; bit-identical to run_ensemble.
EnsembleSummary run_ensemble_serial(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options);

/// Reduces per-path diagnostics in index order.
EnsembleSummary summarize(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options,
                          std::vector<PathDiagnostics> paths);

PathDiagnostics diagnose(const SolutionPath& path, std::span<const double> stop_levels);

nlohmann::json to_json(const GridSpec& grid);

}  // namespace sgb
