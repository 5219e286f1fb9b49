#include "sgb/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgb/error.hpp"

namespace sgb {

std::string_view to_string(Regime r) {
  return r == Regime::case1_bounded_lipschitz ? "case1_bounded_lipschitz" : "case2_superlinear";
}

Regime regime_from_string(std::string_view s) {
  if (s == "case1_bounded_lipschitz" || s == "case1") return Regime::case1_bounded_lipschitz;
  if (s == "case2_superlinear" || s == "case2") return Regime::case2_superlinear;
  throw ConfigError("unknown regime '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Cut-off

double CutoffFn::operator()(double z) const {
  const double a = std::abs(z) / m;
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double r = a - 1.0;
  return 1.0 - r * r * (3.0 - 2.0 * r);
}

double CutoffFn::derivative(double z) const {
  const double a = std::abs(z) / m;
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double r = a - 1.0;
  const double slope = 6.0 * r * (1.0 - r);
  return (z > 0 ? -slope : slope) / m;
}

double cutoff_eval(const CutoffFn& h, double z) { return h(z); }

namespace {
inline double positive_power(double u, double exponent) {
  if (exponent == 2.0) return u * u;
  if (exponent == 1.0) return u;
  return std::pow(u, exponent);
}
}  // namespace

double cutoff_drift(double u, double lambda, const std::optional<CutoffFn>& h) {
  if (!(u > 0.0)) return 0.0;
  const double v = positive_power(u, 1.0 + lambda);
  return h ? v * (*h)(u) : v;
}

double cutoff_drift_derivative(double u, double lambda, const std::optional<CutoffFn>& h) {
  if (!(u > 0.0)) return 0.0;
  const double up = positive_power(u, lambda);
  if (!h) return (1.0 + lambda) * up;
  return (1.0 + lambda) * up * (*h)(u) + up * u * h->derivative(u);
}

double cutoff_drift_lipschitz_bound(double lambda, double m) {
  return (1.0 + lambda) * std::pow(2.0 * m, lambda) +
         std::pow(2.0 * m, 1.0 + lambda) * CutoffFn::max_profile_slope / m;
}

// ---------------------------------------------------------------------------
// Initial data

std::vector<double> InitialData::sample(const GridSpec& grid) const {
  const int n = grid.state_size();
  std::vector<double> u(n, 0.0);
  switch (kind) {
    case Kind::constant: std::fill(u.begin(), u.end(), level); break;
    case Kind::gaussian_bump:
      for (int j = 0; j < n; ++j) {
        const double d = (grid.x(j) - center) / width;
        u[j] = level * std::exp(-0.5 * d * d);
      }
      break;
    case Kind::table:
      if (values.size() != static_cast<std::size_t>(n))
        throw ConfigError("initial data table has " + std::to_string(values.size()) + " entries, grid state has " +
                          std::to_string(n));
      u = values;
      break;
  }
  if (grid.boundary == Boundary::dirichlet_zero) {
    u.front() = 0.0;
    u.back() = 0.0;
  }
  return u;
}

std::string InitialData::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::constant: os << "constant:" << level; break;
    case Kind::gaussian_bump: os << "bump:" << level << ',' << center << ',' << width; break;
    case Kind::table:
      os << "table:";
      for (std::size_t i = 0; i < values.size(); ++i) os << (i ? " " : "") << values[i];
      break;
  }
  return os.str();
}

InitialData InitialData::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("initial data must read kind:params");
  const std::string kind(text.substr(0, colon));
  std::string body(text.substr(colon + 1));
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream is(body);
  InitialData d;
  if (kind == "constant") {
    d.kind = Kind::constant;
    if (!(is >> d.level)) throw ConfigError("constant initial data needs a value");
  } else if (kind == "bump") {
    d.kind = Kind::gaussian_bump;
    if (!(is >> d.level >> d.center >> d.width)) throw ConfigError("bump initial data reads bump:amplitude,center,width");
  } else if (kind == "table") {
    d.kind = Kind::table;
    for (double v; is >> v;) d.values.push_back(v);
  } else {
    throw ConfigError("unknown initial data kind '" + kind + "'");
  }
  return d;
}

// ---------------------------------------------------------------------------
// Problem

double ProblemSpec::sigma(double u, double mu_value) const {
  if (regime == Regime::case1_bounded_lipschitz) {
    if (sigma_case1.kind == Sigma1Kind::zero) return 0.0;
    const double amp = sigma_case1.amplitude < 0.0 ? K : sigma_case1.amplitude;
    return amp * std::min(std::abs(u), 1.0);
  }
  if (!(u > 0.0)) return 0.0;
  const double v = mu_value * positive_power(u, 1.0 + lambda0);
  return cutoff_m ? v * CutoffFn{*cutoff_m}(u) : v;
}

namespace {

std::string at(double t, double x) {
  std::ostringstream os;
  os << "(t,x) = (" << t << ", " << x << ")";
  return os.str();
}

}  // namespace

void ProblemSpec::validate(const GridSpec& grid) const {
  grid.validate();
  if (!(K > 0.0) || !std::isfinite(K)) throw ValidationError("K must be positive and finite");
  if (regime == Regime::case1_bounded_lipschitz) {
    if (!(lambda > 0.0 && lambda <= 1.0))
      throw ValidationError("bounded-sigma regime requires λ∈(0,1], got lambda = " + std::to_string(lambda));
  } else {
    if (!(lambda > 0.0 && lambda < 1.0))
      throw ValidationError("super-linear regime requires λ∈(0,1), got lambda = " + std::to_string(lambda));
    if (!(lambda0 >= 0.0 && lambda0 < 0.5))
      throw ValidationError("super-linear regime requires λ_0∈[0,1/2), got lambda0 = " + std::to_string(lambda0));
  }
  if (cutoff_m && !(*cutoff_m > 0.0)) throw ValidationError("cut-off level m must be positive");
  if (!(theta >= 0.5 && theta <= 1.0)) throw ValidationError("theta must lie in [0.5, 1]");
  if (coeff_bbar.depends_on_x())
    throw ValidationError("bbar must depend on t only (bbar(t) predictable, no x-dependence)");

  const double Kinv = 1.0 / K;
  const bool time_dependent = coeff_a.depends_on_t() || coeff_b.depends_on_t() || coeff_c.depends_on_t() ||
                              coeff_bbar.depends_on_t() || mu.depends_on_t();
  const int levels = time_dependent ? grid.n_t + 1 : 1;
  const int nodes = grid.state_size();
  for (int n = 0; n < levels; ++n) {
    const double t = grid.t(n);
    const double bb = coeff_bbar(t, 0.0);
    if (!(std::abs(bb) <= K)) throw ValidationError("coefficient bound violated: |bbar(t)| > K at t = " + std::to_string(t));
    for (int j = 0; j < nodes; ++j) {
      const double x = grid.x(j);
      const double a = coeff_a(t, x);
      if (!(a >= Kinv && a <= K))
        throw ValidationError("ellipticity violated: a = " + std::to_string(a) + " outside [1/K, K] at " + at(t, x));
      if (!(std::abs(coeff_b(t, x)) <= K))
        throw ValidationError("coefficient bound violated: |b| > K at " + at(t, x));
      if (!(std::abs(coeff_c(t, x)) <= K))
        throw ValidationError("coefficient bound violated: |c| > K at " + at(t, x));
      if (regime == Regime::case2_superlinear && !(std::abs(mu(t, x)) <= K))
        throw ValidationError("coefficient bound violated: |mu| > K at " + at(t, x));
    }
  }

  if (regime == Regime::case1_bounded_lipschitz) {
    // Probe |sigma(u)| <= K (|u| ^ 1) and |sigma(u) - sigma(v)| <= K |u - v|.
    std::vector<double> probe;
    for (int i = -60; i <= 60; ++i) probe.push_back(i * 0.05);
    for (double u : probe) {
      const double s = sigma(u, 0.0);
      if (!(std::abs(s) <= K * std::min(std::abs(u), 1.0) * (1.0 + 1e-12)))
        throw ValidationError("sigma bound violated: |sigma(u)| > K (|u| ^ 1) at u = " + std::to_string(u));
      for (double v : probe) {
        if (u == v) continue;
        if (!(std::abs(s - sigma(v, 0.0)) <= K * std::abs(u - v) * (1.0 + 1e-12)))
          throw ValidationError("sigma Lipschitz bound violated at u = " + std::to_string(u));
      }
    }
  }

  const auto u = u0.sample(grid);
  for (int j = 0; j < nodes; ++j)
    if (!(u[j] >= 0.0) || !std::isfinite(u[j]))
      throw ValidationError("initial data must be nonnegative and finite, violated at x = " + std::to_string(grid.x(j)));
}

std::string canonical_text(const ProblemSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "regime = " << to_string(spec.regime) << '\n'
     << "lambda = " << spec.lambda << '\n'
     << "lambda0 = " << spec.lambda0 << '\n'
     << "coeff_a = " << spec.coeff_a.describe() << '\n'
     << "coeff_b = " << spec.coeff_b.describe() << '\n'
     << "coeff_c = " << spec.coeff_c.describe() << '\n'
     << "coeff_bbar = " << spec.coeff_bbar.describe() << '\n'
     << "mu = " << spec.mu.describe() << '\n'
     << "sigma1 = " << (spec.sigma_case1.kind == Sigma1Kind::zero ? "zero" : "clamp") << '\n'
     << "sigma1_amplitude = " << spec.sigma_case1.amplitude << '\n'
     << "K = " << spec.K << '\n'
     << "u0 = " << spec.u0.describe() << '\n'
     << "cutoff_m = ";
  if (spec.cutoff_m)
    os << *spec.cutoff_m;
  else
    os << "none";
  os << '\n'
     << "theta = " << spec.theta << '\n'
     << "flux = " << (spec.flux == FluxScheme::central ? "central" : "rusanov") << '\n';
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace sgb
