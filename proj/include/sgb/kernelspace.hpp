#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sgb/grid.hpp"

namespace sgb {

/// Auxiliary periodic grid on [-half_width, half_width) used to invert the
/// Bessel multiplier (1 + xi^2)^{-gamma/2} by a discrete Fourier transform.
struct KernelGridSpec {
  std::size_t n = std::size_t{1} << 20;
  double half_width = 64.0;
  double spacing() const { return 2.0 * half_width / static_cast<double>(n); }
};

/// Samples of the Bessel potential kernel R_gamma, the convolution kernel of (1 - Delta)^{-gamma/2}.
class BesselKernelTable {
 public:
  explicit BesselKernelTable(double gamma, KernelGridSpec aux = {});

  double gamma() const { return gamma_; }
  const KernelGridSpec& aux() const { return aux_; }

  /// Smallest |x| at which the table is trusted; 0 for gamma > 1.
  double resolution_limit() const;

  /// R_gamma(x) by linear interpolation between auxiliary nodes.
  /// Throws SingularityError below resolution_limit() and ArgumentError outside the aux grid.
  double value(double x) const;

  /// sum_j R(x_j) h: equals the multiplier at xi = 0, i.e. 1.
  double integral() const;
  /// sum_j R(x_j)^2 h, the discrete counterpart of the integral of |R|^2.
  double l2_squared() const;

  /// Values at x = j h for j = 0 .. n/2.
  std::span<const double> half_line() const { return half_; }

 private:
  double gamma_;
  KernelGridSpec aux_;
  std::vector<double> half_;
  double integral_ = 0, l2_ = 0;
};

struct KernelSample {
  double x = 0;
  double value = 0;
};

struct BesselKernel {
  double gamma = 0;
  std::vector<KernelSample> samples;
  /// N(gamma) = max over samples with |x| >= 2 of value * e^{|x|/2}; 0 when no such sample.
  double tail_constant = 0;
  /// All sampled values strictly positive.
  bool positive = false;
};

/// Evaluates R_gamma at `xs`. Throws ArgumentError for gamma <= 0 and SingularityError
/// when gamma <= 1 and some |x| is below the auxiliary resolution.
BesselKernel bessel_kernel_eval(double gamma, std::span<const double> xs, KernelGridSpec aux = {});

/// Least-squares slope of log R_gamma against log |x| over the samples.
double loglog_slope(const BesselKernel& kernel);

/// Behaviour of sum |R_gamma|^2 h under successive halving of the auxiliary spacing.
struct RefinementStudy {
  double gamma = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> values;
  std::vector<double> increments;  ///< values[i+1] - values[i]
  std::vector<double> ratios;      ///< increments[i+1] / increments[i]
  bool converged = false;          ///< geometric decay of the increments (last two ratios <= 0.8)
};

RefinementStudy kernel_l2_refinement(double gamma, std::span<const std::size_t> sizes, double half_width = 64.0);

// ---------------------------------------------------------------------------
// Spectral calculus on periodic grids

/// (1 - Delta)^{gamma/2} u via the discrete multiplier (1 + xi_k^2)^{gamma/2}, xi_k = 2 pi k / L.
/// Throws UnsupportedError on non-periodic grids.
std::vector<double> bessel_potential(std::span<const double> u, const GridSpec& grid, double gamma);

/// Discrete L_p norm (sum |u_j|^p dx)^{1/p}.
double lp_norm(std::span<const double> u, double dx, double p);

struct SobolevNorm {
  double gamma = 0;
  double p = 2;
  double value = 0;
};

/// ||(1 - Delta)^{gamma/2} u||_{L_p} on a periodic grid.
SobolevNorm fractional_norm(std::span<const double> u, const GridSpec& grid, double gamma, double p);

struct MultiplicativeReport {
  double gamma = 0, p = 0;  ///< interpolated order and integrability
  double lhs = 0;           ///< ||u||_{H_p^gamma}
  double rhs = 0;           ///< ||u||_{H_{p0}^{gamma0}}^eps ||u||_{H_{p1}^{gamma1}}^{1-eps}
  bool holds = false;       ///< lhs <= rhs (1 + 1e-8)
};

/// Interpolation inequality between (gamma0, p0) and (gamma1, p1) at weight eps in [0,1].
MultiplicativeReport check_multiplicative_inequality(std::span<const double> u, const GridSpec& grid,
                                                     std::pair<double, double> gammas,
                                                     std::pair<double, double> ps, double eps);
/// As above, with the target (gamma, p) given explicitly; throws ArgumentError unless
/// 1/p = eps/p0 + (1-eps)/p1 and gamma = eps gamma0 + (1-eps) gamma1.
MultiplicativeReport check_multiplicative_inequality(std::span<const double> u, const GridSpec& grid,
                                                     std::pair<double, double> gammas,
                                                     std::pair<double, double> ps, double eps, double gamma,
                                                     double p);

/// Lags (in grid points) considered by holder_seminorm; max_lag = 0 means n/8.
struct LagWindow {
  int min_lag = 1;
  int max_lag = 0;
};

/// max |u(x) - u(y)| / |x - y|^order over non-wrapping grid pairs with lag in the window.
double holder_seminorm(std::span<const double> u, double dx, double order, LagWindow window = {});

}  // namespace sgb
