#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "sgb/grid.hpp"

namespace sgb {

enum class NoiseConstruction { rectangle_increment, series_truncation };
enum class BasisKind { trigonometric, haar };

std::string_view to_string(NoiseConstruction c);
std::string_view to_string(BasisKind k);

/// Orthonormal family {eta_k} sampled on the noise cells of a grid.
///
/// trigonometric: eta_0 = 1/sqrt(L), then cos/sin pairs of increasing
/// wavenumber, then the Nyquist cosine when n_x is even.
/// haar: scaling function, then Haar wavelets coarse to fine (n_x = 2^J).
struct BasisFamily {
  BasisKind kind = BasisKind::trigonometric;
  int n_modes = 1;
  GridSpec domain;

  /// eta_k at noise cell j (0 <= j < n_x).
  double eval(int k, int j) const;

  /// Throws ConfigError on aliasing (n_modes > n_x) or an unsupported grid size.
  void validate() const;

  /// Trigonometric on periodic grids, Haar on Dirichlet grids.
  static BasisFamily default_for(const GridSpec& grid, int n_modes);
};

/// Read-only access to noise increments Delta W(t_n, x_j), one row per time step.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual const GridSpec& grid() const = 0;
  /// Writes the n_x increments of step n.
  virtual void row(int n, std::span<double> out) const = 0;
  /// Writes increments j0 .. j0+out.size()-1 of step n.
  virtual void row_range(int n, int j0, std::span<double> out) const;
};

/// Materialized n_t x n_x increment array. Immutable after construction.
class NoiseField final : public NoiseSource {
 public:
  NoiseField(GridSpec grid, std::vector<double> increments, std::uint64_t seed,
             NoiseConstruction construction, int n_modes);

  const GridSpec& grid() const override { return grid_; }
  void row(int n, std::span<double> out) const override;
  void row_range(int n, int j0, std::span<double> out) const override;

  std::span<const double> row_view(int n) const;
  std::span<const double> increments() const { return increments_; }
  std::uint64_t seed() const { return seed_; }
  NoiseConstruction construction() const { return construction_; }
  int n_modes() const { return n_modes_; }

 private:
  GridSpec grid_;
  std::vector<double> increments_;
  std::uint64_t seed_;
  NoiseConstruction construction_;
  int n_modes_;
};

/// Lazily generated rectangle-increment noise; row(n) is bit-identical to the
/// corresponding row of generate_rectangle_noise(grid, seed, stream).
class RectangleNoiseStream final : public NoiseSource {
 public:
  RectangleNoiseStream(GridSpec grid, std::uint64_t seed, std::uint32_t stream = 0);
  const GridSpec& grid() const override { return grid_; }
  void row(int n, std::span<double> out) const override;
  void row_range(int n, int j0, std::span<double> out) const override;

 private:
  GridSpec grid_;
  std::uint64_t seed_;
  std::uint32_t stream_;
  double scale_;
};

/// Lazily generated truncated-series noise.
class SeriesNoiseStream final : public NoiseSource {
 public:
  SeriesNoiseStream(GridSpec grid, BasisFamily basis, std::uint64_t seed, std::uint32_t stream = 0);
  const GridSpec& grid() const override { return grid_; }
  void row(int n, std::span<double> out) const override;

 private:
  GridSpec grid_;
  BasisFamily basis_;
  std::uint64_t seed_;
  std::uint32_t stream_;
};

/// Identically zero noise.
class ZeroNoise final : public NoiseSource {
 public:
  explicit ZeroNoise(GridSpec grid) : grid_(grid) {}
  const GridSpec& grid() const override { return grid_; }
  void row(int, std::span<double> out) const override;

 private:
  GridSpec grid_;
};

/// i.i.d. N(0, dt*dx) increments, one per space-time cell. Rows are filled in parallel.
NoiseField generate_rectangle_noise(const GridSpec& grid, std::uint64_t seed, std::uint32_t stream = 0);
/// Serial reference of generate_rectangle_noise.
NoiseField generate_rectangle_noise_serial(const GridSpec& grid, std::uint64_t seed,
                                           std::uint32_t stream = 0);

/// Delta W(t_n, x_j) = dx * sum_{k < n_modes} eta_k(x_j) Delta w_k(t_n), Delta w_k ~ N(0, dt).
NoiseField generate_series_noise(const GridSpec& grid, const BasisFamily& basis, std::uint64_t seed,
                                 std::uint32_t stream = 0);
/// Same field by direct O(n_modes * n_x) summation; reference for the fast transforms.
NoiseField generate_series_noise_direct(const GridSpec& grid, const BasisFamily& basis,
                                        std::uint64_t seed, std::uint32_t stream = 0);

/// Axis-aligned space-time rectangle [t0,t1] x [x0,x1].
struct Rect {
  double t0 = 0, t1 = 0, x0 = 0, x1 = 0;
  double area() const;
  Rect intersect(const Rect& other) const;
};

struct RectPair {
  Rect a, b;
};

struct CovarianceProbe {
  RectPair pair;
  double empirical = 0;  ///< (1/N) sum W_i(A) W_i(B)
  double target = 0;     ///< area(A intersect B)
  double stderr_ = 0;    ///< standard error of `empirical`
  double z = 0;          ///< (empirical - target) / stderr
};

struct CovarianceReport {
  std::size_t n_fields = 0;
  std::vector<CovarianceProbe> probes;
  double max_abs_z() const;
};

using NoiseFactory = std::function<std::unique_ptr<NoiseSource>(std::size_t index)>;

/// Empirical cov(W(A), W(B)) over an ensemble of fields produced by `make`.
/// Rectangles must be aligned to the grid cells. Fields are processed in parallel
/// (`make` is called concurrently); the result does not depend on the thread count.
CovarianceReport validate_covariance(std::size_t n_fields, const NoiseFactory& make,
                                     std::span<const RectPair> pairs);
CovarianceReport validate_covariance(std::span<const NoiseField> fields,
                                     std::span<const RectPair> pairs);

/// Per-probe z-scores of the difference between two covariance estimates.
std::vector<double> covariance_discrepancy(const CovarianceReport& lhs, const CovarianceReport& rhs);

/// Sample moments of a batch of values with standard errors for a normality check.
struct MomentSummary {
  std::size_t count = 0;
  double mean = 0, variance = 0, kurtosis = 0;
  double variance_stderr = 0, kurtosis_stderr = 0;
};
MomentSummary sample_moments(std::span<const double> values);

/// Binary field dump: "STWN", u32 version, u64 n_t, u64 n_x, f64 dx, f64 dt, then
/// row-major f64 increments, all little-endian.
void write_noise_dump(const std::filesystem::path& path, const NoiseField& field);
/// Reads a dump; the returned field has a periodic grid with x_min = 0.
NoiseField read_noise_dump(const std::filesystem::path& path);

}  // namespace sgb
