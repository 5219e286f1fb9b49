#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "sgb/ensemble.hpp"
#include "sgb/grid.hpp"
#include "sgb/problem.hpp"
#include "sgb/solver.hpp"

namespace sgb {

enum class Direction { time, space };

std::string_view to_string(Direction d);

/// Observation sub-rectangle [t0, t1] x [x0, x1] in physical coordinates.
struct Window {
  double t0 = 0, t1 = 0;
  double x0 = 0, x1 = 0;
};

/// Row-major samples of one realization; rows are ordered by step index.
struct FieldSamples {
  std::span<const double> values;
  std::size_t row_size = 0;
  std::vector<int> steps;
  double dt = 1, dx = 1, x_min = 0;

  static FieldSamples of(const SolutionPath& path);
};

/// Per-lag sums of |increment|^q and pair counts from one realization.
struct PathStructure {
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  /// Largest |increment| per lag, for the oscillation diagnostic.
  std::vector<double> max_abs;
};

struct EstimatorSettings {
  Direction direction = Direction::space;
  double q = 2.0;
  /// Positive lags in grid units (time steps or cells).
  std::vector<int> lags;
  Window window;
  /// Measurements must start at or after this time; must be positive.
  double burn_in = 0.0;
  std::size_t bootstrap_replicates = 400;
  std::uint64_t bootstrap_seed = 0;
  double confidence = 0.95;
  /// Fewest realizations accepted.
  std::size_t min_paths = 30;
};

struct EstimatorReport {
  Direction direction = Direction::space;
  std::vector<int> lags;
  double lag_unit = 1;  ///< dt or dx
  std::vector<double> structure_values;
  double q = 2;
  double exponent_hat = 0;
  double ci_low = 0, ci_high = 0;
  Window window;
  std::size_t n_paths = 0;
  /// Slope of log median per-path max oscillation against log lag; diagnostic only.
  double oscillation_exponent = 0;

  nlohmann::json to_json() const;
};

/// Checks window and lag preconditions against the sampling grid. Throws ArgumentError.
void check_estimator_settings(const EstimatorSettings& s, double x_min, double x_max, double t_end);

/// Accumulates |u(. + lag) - u(.)|^q along the chosen direction inside the window.
/// Time lags need both steps recorded; missing pairs are skipped.
PathStructure path_structure(const FieldSamples& field, const EstimatorSettings& s);

/// Pools per-path accumulators: S_q(l) = sum of sums / sum of counts; exponent = OLS slope
/// of log S_q against log l divided by q; percentile CI from resampling paths.
EstimatorReport structure_from_accumulators(std::span<const PathStructure> per_path, const EstimatorSettings& s,
                                            double lag_unit);

/// Convenience over recorded paths; validates the window against the first path's grid.
EstimatorReport structure_function(std::span<const SolutionPath> paths, const EstimatorSettings& s);

/// OLS slope of y against x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// min_lag, 2 min_lag, 4 min_lag, ... not exceeding max_lag.
std::vector<int> dyadic_lags(int min_lag, int max_lag);

/// Long-form CSV `lag,Sq,direction,q` with lags in physical units.
void write_structure_csv(const std::filesystem::path& path, std::span<const EstimatorReport> reports);

// ---------------------------------------------------------------------------
// Verification of the regularity and moment predictions

/// Estimates for one parameter cell.
struct ExponentInput {
  ProblemSpec spec;
  GridSpec grid;
  EstimatorReport space;
  EstimatorReport time;
};

struct ExponentCell {
  double lambda = 0, lambda0 = 0;
  double space_target = 0.5, time_target = 0.25;
  double space_hat = 0, space_low = 0, space_high = 0;
  double time_hat = 0, time_low = 0, time_high = 0;
  bool space_lower_ok = false, time_lower_ok = false;
  /// |hat - target| <= tolerance.
  bool space_band_ok = false, time_band_ok = false;
};

struct ExponentReport {
  Regime regime = Regime::case1_bounded_lipschitz;
  double tolerance = 0.05;
  std::vector<ExponentCell> cells;
  /// Largest pairwise difference of spatial estimates.
  double max_pairwise_space_diff = 0;
  /// Every pair of spatial CIs overlaps.
  bool space_cis_overlap = true;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Case 1: space target 1/2, time target 1/4; pass requires every cell inside the
/// tolerance band and overlapping spatial CIs across lambda. Grids must match.
ExponentReport verify_case1_exponents(std::span<const ExponentInput> inputs, double tolerance = 0.05);

/// Spatial target 1/2 - max((lambda - 1/2)^+, lambda0); the time target is half of it.
double case2_space_target(double lambda, double lambda0);

/// Case 2: one-sided, a cell fails only when a spatial estimate falls below target - tolerance.
/// Rejects lambda outside (0,1) or lambda0 outside [0,1/2).
ExponentReport verify_case2_exponents(std::span<const ExponentInput> inputs, double tolerance = 0.05);

struct MassBoundReport {
  Regime regime = Regime::case1_bounded_lipschitz;
  std::string statistic;  ///< which expectation is bounded
  double mean = 0, stderr_ = 0;
  double bound = 0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Case 1: E int_0^T ||u||_1 dt against T e^{4KT} (1 + margin) E||u0||_1.
/// Case 2: E sup_t ||u||_1^{1/2} against 3 e^{2KT} E||u0||_1^{1/2}.
/// Passes when mean + 3 stderr <= bound.
MassBoundReport mass_bound_check(const EnsembleSummary& summary, const ProblemSpec& spec, const GridSpec& grid,
                                 double margin = 0.0);

struct ExceedancePoint {
  double R = 0;
  std::size_t count = 0, n = 0;
  double p = 0, ci_low = 0, ci_high = 0;
};

struct ExceedanceCurve {
  std::string label;
  std::vector<ExceedancePoint> points;
  bool nonincreasing = true;
};

struct NonexplosionReport {
  std::vector<ExceedanceCurve> curves;
  /// Levels R <= uniform_up_to take part in the cross-curve comparison.
  double uniform_up_to = 0;
  /// Per level: the Wilson intervals of all curves share a point.
  std::vector<bool> curves_agree;
  /// curves_agree holds at every compared level.
  bool uniform_across_curves = true;
  /// sup over curves of the exceedance estimate, per R.
  std::vector<double> sup_p;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Wilson score interval for count successes out of n.
std::pair<double, double> wilson_interval(std::size_t count, std::size_t n, double z = 1.959963984540054);

/// Exceedance curves of one or more ensembles (e.g. one per cut-off level) sharing
/// the same stop levels. Needs at least 3 levels. Cut-off ensembles describe the same
/// solution only below their smallest cut-off, so agreement across curves is required
/// at R <= uniform_up_to and merely reported above it.
NonexplosionReport nonexplosion_curve(std::span<const EnsembleSummary> summaries,
                                      std::span<const std::string> labels,
                                      double uniform_up_to = std::numeric_limits<double>::infinity());

}  // namespace sgb
