#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sgb/grid.hpp"
#include "sgb/noise.hpp"
#include "sgb/problem.hpp"

namespace sgb {

/// Paths whose values leave this range (or become non-finite) are flagged as exploded.
inline constexpr double kExplosionThreshold = 1e12;

/// Noise-floor tolerance 3 K sqrt(dt/dx) used by positivity diagnostics.
double noise_floor_tolerance(const ProblemSpec& spec, const GridSpec& grid);

/// Tridiagonal system, optionally with periodic corner entries, factored once and
/// solved many times. Row j reads lower[j] u[j-1] + diag[j] u[j] + upper[j] u[j+1].
class TridiagonalSolver {
 public:
  TridiagonalSolver() = default;
  /// Throws NumericalError on a vanishing pivot.
  TridiagonalSolver(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper, bool cyclic);

  std::size_t size() const { return diag_.size(); }
  /// Solves in place.
  void solve(std::span<double> rhs) const;

 private:
  void factor();
  void thomas(std::span<double> x) const;

  std::vector<double> lower_, diag_, upper_;
  std::vector<double> cprime_, inv_denom_;
  std::vector<double> z_;  // Sherman-Morrison correction vector
  double corner_gamma_ = 0, corner_alpha_ = 0, corner_beta_ = 0, sm_denominator_ = 1;
  bool cyclic_ = false;
};

/// Semi-implicit stepper for the cut-off equation
///   du = (a u_xx + b u_x + c u + (g(u))_x) dt + sigma(u) dW,
///   g(u) = bbar/(1+lambda) (u^+)^{1+lambda} h_m(u).
/// Diffusion uses a theta scheme with a frozen at the start of the step (tridiagonal
/// solve); transport, reaction, the conservative flux difference and the noise term
/// sigma(u) dW / dx are explicit and evaluated at the pre-step state.
class Stepper {
 public:
  Stepper(const ProblemSpec& spec, const GridSpec& grid, double dt);

  /// Advances `state` from t to t + dt with the noise increments of this step
  /// (n_x entries). Returns max |sigma(u)| over the step.
  double advance(std::span<double> state, double t, std::span<const double> noise_row);

  double dt() const { return dt_; }

 private:
  void refresh_coefficients(double t);

  ProblemSpec spec_;
  GridSpec grid_;
  double dt_;
  std::optional<CutoffFn> cutoff_;
  bool time_dependent_ = false;
  bool have_coefficients_ = false;
  std::vector<double> a_, b_, c_, mu_;
  std::vector<double> rhs_, g_, flux_;
  TridiagonalSolver solver_;
};

/// One semi-implicit step; returns the new state.
std::vector<double> step(std::span<const double> state, double t, const ProblemSpec& spec, const GridSpec& grid,
                         std::span<const double> noise_slice, double dt);

struct EvolveOptions {
  bool validate = true;
  /// Store every `record_stride`-th state (the final state is always stored).
  int record_stride = 1;
  bool keep_states = true;
  /// Points below -negativity_tolerance at or after this step are counted.
  int burn_in_step = 0;
  /// Negative = use noise_floor_tolerance(spec, grid).
  double negativity_tolerance = -1.0;
};

/// One realized trajectory plus per-step diagnostics.
struct SolutionPath {
  GridSpec grid;
  int row_size = 0;
  std::vector<int> recorded_steps;
  std::vector<double> states;  ///< row-major, one row per recorded step

  std::vector<double> mass_series;         ///< sum_j |u_j| dx per step
  std::vector<double> signed_mass_series;  ///< sum_j u_j dx per step
  std::vector<double> sup_series;          ///< max_j |u_j| per step
  std::vector<double> min_series;          ///< min_j u_j per step
  std::map<double, std::optional<int>> hitting_times;  ///< first step with sup >= R
  bool exploded = false;
  std::optional<int> explosion_step;
  std::uint64_t seed = 0;
  std::uint32_t path_index = 0;
  double sigma_max = 0.0;
  std::size_t negative_points = 0;  ///< points below -tolerance after burn-in
  double negativity_tolerance = 0.0;

  std::size_t n_recorded() const { return recorded_steps.size(); }
  std::span<const double> state(std::size_t k) const {
    return std::span<const double>(states).subspan(k * static_cast<std::size_t>(row_size), row_size);
  }
  /// Recorded row holding step n, if any.
  std::optional<std::size_t> row_of_step(int n) const;
  /// Last step reached (n_t unless exploded earlier).
  int last_step() const { return static_cast<int>(mass_series.size()) - 1; }
};

/// Runs the cut-off dynamics to t_end (or until explosion) on the given noise.
SolutionPath evolve(const ProblemSpec& spec, const GridSpec& grid, const NoiseSource& noise,
                    std::span<const double> stop_levels, const EvolveOptions& options = {});

/// Long-form CSV with header `t,x,u`.
void write_trajectory_csv(const std::filesystem::path& path, const SolutionPath& sol);
/// "SPTH", u32 version, u64 rows, u64 row size, f64 dx, f64 row spacing in time, then
/// row-major f64 states, little-endian.
void write_trajectory_dump(const std::filesystem::path& path, const SolutionPath& sol);

}  // namespace sgb
