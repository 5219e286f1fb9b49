#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgb/coefficient.hpp"
#include "sgb/grid.hpp"

namespace sgb {

enum class Regime { case1_bounded_lipschitz, case2_superlinear };

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

/// Smooth cut-off h_m(z) = h(z/m) with h = 1 on [-1,1], h = 0 outside (-2,2).
///
/// Profile on 1 <= |z| <= 2: h(z) = 1 - s(|z| - 1) with the C^1 smoothstep
/// s(r) = 3r^2 - 2r^3, so h(1.5) = 1/2 and max |h'| = 3/2.
struct CutoffFn {
  double m = 1.0;

  static constexpr double max_profile_slope = 1.5;

  double operator()(double z) const;
  /// d/dz h_m(z).
  double derivative(double z) const;
};

/// h_m(z); returns exactly 1.0 on the plateau |z| <= m.
double cutoff_eval(const CutoffFn& h, double z);

/// Pre-derivative flux (u^+)^{1+lambda} h_m(u); h_m = 1 when `h` is empty.
double cutoff_drift(double u, double lambda, const std::optional<CutoffFn>& h);

/// d/du of cutoff_drift.
double cutoff_drift_derivative(double u, double lambda, const std::optional<CutoffFn>& h);

/// Closed-form Lipschitz bound (1+lambda)(2m)^lambda + (2m)^{1+lambda} max|h'| / m.
double cutoff_drift_lipschitz_bound(double lambda, double m);

/// Diffusion coefficient of the bounded regime.
enum class Sigma1Kind {
  clamp,  ///< sigma(u) = amplitude * min(|u|, 1)
  zero,   ///< sigma = 0 (deterministic control runs)
};

struct Sigma1 {
  Sigma1Kind kind = Sigma1Kind::clamp;
  /// Amplitude; negative means "use K".
  double amplitude = -1.0;
};

/// Nonnegative initial data.
struct InitialData {
  enum class Kind { constant, gaussian_bump, table };
  Kind kind = Kind::gaussian_bump;
  double level = 1.0;   ///< constant value, or bump amplitude
  double center = 0.0;  ///< bump center
  double width = 1.0;   ///< bump standard deviation
  std::vector<double> values;

  /// Values on the grid state (boundary nodes of Dirichlet grids set to 0).
  std::vector<double> sample(const GridSpec& grid) const;
  std::string describe() const;
  static InitialData parse(std::string_view text);
};

enum class FluxScheme { central, rusanov };

/// Coefficients, exponents and regime of
///   du = (a u_xx + b u_x + c u + bbar |u|^lambda u_x) dt + sigma(u) dW.
struct ProblemSpec {
  Regime regime = Regime::case1_bounded_lipschitz;
  double lambda = 1.0;
  double lambda0 = 0.0;
  Coefficient coeff_a = Coefficient::constant(1.0);
  Coefficient coeff_b = Coefficient::constant(0.0);
  Coefficient coeff_c = Coefficient::constant(0.0);
  Coefficient coeff_bbar = Coefficient::constant(0.0);
  Coefficient mu = Coefficient::constant(1.0);
  Sigma1 sigma_case1;
  double K = 1.0;
  InitialData u0;
  std::optional<double> cutoff_m;
  /// Implicitness of the diffusion step: 0.5 Crank-Nicolson, 1 backward Euler.
  double theta = 0.5;
  FluxScheme flux = FluxScheme::central;

  std::optional<CutoffFn> cutoff() const {
    return cutoff_m ? std::optional<CutoffFn>(CutoffFn{*cutoff_m}) : std::nullopt;
  }

  /// sigma(u) at a point with diffusion coefficient mu_value (ignored in case 1).
  double sigma(double u, double mu_value) const;

  /// Checks exponent ranges, coefficient bounds at every grid node and time level,
  /// the sigma assumptions on a probe set, and u0 >= 0. Throws ValidationError
  /// naming the violated assumption.
  void validate(const GridSpec& grid) const;
};

/// Canonical `key = value` lines describing the problem; equal specs give equal text.
std::string canonical_text(const ProblemSpec& spec);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

inline std::uint64_t spec_hash(const ProblemSpec& spec) { return fnv1a64(canonical_text(spec)); }

}  // namespace sgb
