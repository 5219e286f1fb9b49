#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace sgb {

enum class Boundary { periodic, dirichlet_zero };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// Uniform space-time grid on [x_min, x_max] x [0, t_end].
///
/// Periodic grids carry n_x nodes x_j = x_min + j dx (j < n_x); the node at
/// x_max is identified with x_min. Dirichlet grids carry the n_x + 1 nodes
/// including both boundary nodes, which are held at zero.
struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_x = 64;
  double t_end = 1.0;
  int n_t = 64;
  Boundary boundary = Boundary::periodic;

  double length() const { return x_max - x_min; }
  double dx() const { return (x_max - x_min) / n_x; }
  double dt() const { return t_end / n_t; }
  double x(int j) const { return x_min + j * dx(); }
  double t(int n) const { return n * dt(); }

  /// Number of entries per time level of a solution state.
  int state_size() const { return boundary == Boundary::periodic ? n_x : n_x + 1; }

  /// Throws ConfigError when the grid is degenerate.
  void validate() const;

  /// Grid with the default time step dt = factor * dx^2 over [0, t_end].
  static GridSpec with_parabolic_dt(double x_min, double x_max, int n_x, double t_end,
                                    Boundary boundary, double factor = 0.25);

  bool operator==(const GridSpec&) const = default;
};

}  // namespace sgb
