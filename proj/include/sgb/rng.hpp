#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace sgb {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A draw is a pure function of (key, counter), so any (path, step, cell)
/// triple maps to one reproducible Gaussian regardless of thread layout.
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter block(Counter ctr, Key key);

}  // namespace philox

/// Tags separating independent random streams drawn from one master seed.
enum class StreamTag : std::uint32_t {
  rectangle_noise = 1,
  series_noise = 2,
  bootstrap = 3,
  synthetic = 4,
  initial_data = 5,
};

/// Keyed source of standard normals addressed by (row, column).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint32_t stream, StreamTag tag)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        tag_(static_cast<std::uint32_t>(tag)) {}

  /// Two independent N(0,1) draws for the column pair (2*pair, 2*pair+1) of `row`.
  std::pair<double, double> normal_pair(std::uint32_t row, std::uint32_t pair) const;

  /// N(0,1) draw at (row, col).
  double normal(std::uint32_t row, std::uint32_t col) const {
    auto [a, b] = normal_pair(row, col >> 1);
    return (col & 1u) ? b : a;
  }

  /// Uniform draw in [0,1) at (row, col), from the same counter space as normal().
  double uniform(std::uint32_t row, std::uint32_t col) const;

  /// Fills out[i] = normal(row, col0 + i).
  void fill_normals(std::uint32_t row, std::uint32_t col0, double* out, std::size_t count) const;

 private:
  philox::Key key_;
  std::uint32_t stream_;
  std::uint32_t tag_;
};

}  // namespace sgb
