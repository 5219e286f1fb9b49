#include "sgb/grid.hpp"

#include <cmath>

#include "sgb/error.hpp"

namespace sgb {

std::string_view to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "dirichlet_zero";
}

Boundary boundary_from_string(std::string_view s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet_zero" || s == "dirichlet") return Boundary::dirichlet_zero;
  throw ConfigError("unknown boundary '" + std::string(s) + "'");
}

void GridSpec::validate() const {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
    throw ConfigError("grid: x_max must exceed x_min");
  if (n_x < 2) throw ConfigError("grid: n_x must be at least 2");
  if (n_t < 1) throw ConfigError("grid: n_t must be positive");
  if (!std::isfinite(t_end) || !(t_end > 0.0)) throw ConfigError("grid: t_end must be positive");
  if (!(dx() > 0.0) || !(dt() > 0.0)) throw ConfigError("grid: degenerate spacing");
}

GridSpec GridSpec::with_parabolic_dt(double x_min, double x_max, int n_x, double t_end,
                                     Boundary boundary, double factor) {
  GridSpec g{x_min, x_max, n_x, t_end, 1, boundary};
  const double dx = g.dx();
  g.n_t = static_cast<int>(std::ceil(t_end / (factor * dx * dx) - 1e-9));
  if (g.n_t < 1) g.n_t = 1;
  return g;
}

}  // namespace sgb
