#include "sgb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sgb/error.hpp"
#include "sgb/io.hpp"

namespace sgb {

double noise_floor_tolerance(const ProblemSpec& spec, const GridSpec& grid) {
  return 3.0 * spec.K * std::sqrt(grid.dt() / grid.dx());
}

// ---------------------------------------------------------------------------
// Tridiagonal

TridiagonalSolver::TridiagonalSolver(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                                     bool cyclic)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)), cyclic_(cyclic) {
  if (lower_.size() != diag_.size() || upper_.size() != diag_.size() || diag_.empty())
    throw ArgumentError("TridiagonalSolver: band sizes differ");
  if (cyclic_ && diag_.size() < 3) throw ArgumentError("TridiagonalSolver: cyclic system needs at least 3 rows");
  factor();
}

void TridiagonalSolver::factor() {
  const std::size_t n = diag_.size();
  std::vector<double> d = diag_;
  if (cyclic_) {
    // A = A' + w v^T with w = (gamma, 0, ..., 0, alpha), v = (1, 0, ..., 0, beta/gamma).
    corner_beta_ = lower_[0];       // A[0][n-1]
    corner_alpha_ = upper_[n - 1];  // A[n-1][0]
    corner_gamma_ = -diag_[0];
    d[0] -= corner_gamma_;
    d[n - 1] -= corner_alpha_ * corner_beta_ / corner_gamma_;
  }
  cprime_.assign(n, 0.0);
  inv_denom_.assign(n, 0.0);
  double denom = d[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) denom = d[i] - lower_[i] * cprime_[i - 1];
    if (!(std::abs(denom) > 1e-300) || !std::isfinite(denom))
      throw NumericalError("tridiagonal solve: vanishing pivot at row " + std::to_string(i));
    inv_denom_[i] = 1.0 / denom;
    cprime_[i] = (i + 1 < n) ? upper_[i] * inv_denom_[i] : 0.0;
  }
  if (cyclic_) {
    z_.assign(n, 0.0);
    z_[0] = corner_gamma_;
    z_[n - 1] = corner_alpha_;
    thomas(z_);
    sm_denominator_ = 1.0 + z_[0] + corner_beta_ * z_[n - 1] / corner_gamma_;
    if (!(std::abs(sm_denominator_) > 1e-300))
      throw NumericalError("tridiagonal solve: singular cyclic correction");
  }
}

void TridiagonalSolver::thomas(std::span<double> x) const {
  const std::size_t n = diag_.size();
  x[0] *= inv_denom_[0];
  for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - lower_[i] * x[i - 1]) * inv_denom_[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
}

void TridiagonalSolver::solve(std::span<double> rhs) const {
  if (rhs.size() != diag_.size()) throw ArgumentError("TridiagonalSolver: rhs size mismatch");
  thomas(rhs);
  if (cyclic_) {
    const std::size_t n = diag_.size();
    const double f = (rhs[0] + corner_beta_ * rhs[n - 1] / corner_gamma_) / sm_denominator_;
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= f * z_[i];
  }
}

// ---------------------------------------------------------------------------
// Stepper

Stepper::Stepper(const ProblemSpec& spec, const GridSpec& grid, double dt)
    : spec_(spec), grid_(grid), dt_(dt), cutoff_(spec.cutoff()) {
  grid_.validate();
  if (!(dt > 0.0)) throw ArgumentError("Stepper: dt must be positive");
  if (grid_.boundary == Boundary::periodic && grid_.n_x < 3)
    throw ConfigError("periodic grids need at least 3 nodes");
  time_dependent_ = spec.coeff_a.depends_on_t() || spec.coeff_b.depends_on_t() || spec.coeff_c.depends_on_t() ||
                    spec.mu.depends_on_t();
  const std::size_t n = static_cast<std::size_t>(grid_.state_size());
  a_.resize(n);
  b_.resize(n);
  c_.resize(n);
  mu_.resize(n);
  g_.resize(n);
  flux_.resize(n);
  rhs_.resize(n);
}

void Stepper::refresh_coefficients(double t) {
  const int n = grid_.state_size();
  for (int j = 0; j < n; ++j) {
    const double x = grid_.x(j);
    a_[j] = spec_.coeff_a(t, x);
    b_[j] = spec_.coeff_b(t, x);
    c_[j] = spec_.coeff_c(t, x);
    mu_[j] = spec_.regime == Regime::case2_superlinear ? spec_.mu(t, x) : 0.0;
  }
  const double dx = grid_.dx();
  const double k = spec_.theta * dt_ / (dx * dx);
  const bool periodic = grid_.boundary == Boundary::periodic;
  const int first = periodic ? 0 : 1;
  const int last = periodic ? n : n - 1;  // exclusive
  std::vector<double> lo, di, up;
  for (int j = first; j < last; ++j) {
    lo.push_back(-k * a_[j]);
    di.push_back(1.0 + 2.0 * k * a_[j]);
    up.push_back(-k * a_[j]);
  }
  if (!periodic) {
    // Boundary nodes are fixed at zero; drop the couplings to them.
    lo.front() = 0.0;
    up.back() = 0.0;
  }
  solver_ = TridiagonalSolver(std::move(lo), std::move(di), std::move(up), periodic);
  have_coefficients_ = true;
}

double Stepper::advance(std::span<double> u, double t, std::span<const double> noise) {
  const int n = grid_.state_size();
  if (u.size() != static_cast<std::size_t>(n)) throw ArgumentError("Stepper: state size mismatch");
  if (noise.size() != static_cast<std::size_t>(grid_.n_x)) throw ArgumentError("Stepper: noise row size mismatch");
  if (time_dependent_ || !have_coefficients_) refresh_coefficients(t);

  const bool periodic = grid_.boundary == Boundary::periodic;
  const double dx = grid_.dx();
  const double inv_dx = 1.0 / dx;
  const double inv_dx2 = inv_dx * inv_dx;
  const double explicit_weight = 1.0 - spec_.theta;
  const double lambda = spec_.lambda;
  const double bbar = spec_.coeff_bbar(t, 0.0) / (1.0 + lambda);

  // Conservative flux of (g(u))_x at the right face of each node.
  const bool has_flux = bbar != 0.0;
  if (has_flux) {
    for (int j = 0; j < n; ++j) g_[j] = bbar * cutoff_drift(u[j], lambda, cutoff_);
    const int faces = periodic ? n : n - 1;
    for (int j = 0; j < faces; ++j) {
      const int r = (j + 1 == n) ? 0 : j + 1;
      double f = 0.5 * (g_[j] + g_[r]);
      if (spec_.flux == FluxScheme::rusanov) {
        const double speed = std::abs(bbar) * std::max(std::abs(cutoff_drift_derivative(u[j], lambda, cutoff_)),
                                                        std::abs(cutoff_drift_derivative(u[r], lambda, cutoff_)));
        f += 0.5 * speed * (u[r] - u[j]);
      }
      flux_[j] = f;
    }
  }

  double sigma_max = 0.0;
  const int first = periodic ? 0 : 1;
  const int last = periodic ? n : n - 1;
  for (int j = first; j < last; ++j) {
    const int jm = (j == 0) ? n - 1 : j - 1;
    const int jp = (j + 1 == n) ? 0 : j + 1;
    const double uj = u[j];
    const double lap = (u[jp] - 2.0 * uj + u[jm]) * inv_dx2;
    double drift = explicit_weight * a_[j] * lap + b_[j] * (u[jp] - u[jm]) * (0.5 * inv_dx) + c_[j] * uj;
    if (has_flux) drift += (flux_[j] - flux_[jm]) * inv_dx;
    const double s = spec_.sigma(uj, mu_[j]);
    sigma_max = std::max(sigma_max, std::abs(s));
    rhs_[j - first] = uj + dt_ * drift + s * noise[j] * inv_dx;
  }
  std::span<double> unknowns(rhs_.data(), static_cast<std::size_t>(last - first));
  solver_.solve(unknowns);
  std::copy(unknowns.begin(), unknowns.end(), u.begin() + first);
  return sigma_max;
}

std::vector<double> step(std::span<const double> state, double t, const ProblemSpec& spec, const GridSpec& grid,
                         std::span<const double> noise_slice, double dt) {
  Stepper s(spec, grid, dt);
  std::vector<double> u(state.begin(), state.end());
  s.advance(u, t, noise_slice);
  return u;
}

// ---------------------------------------------------------------------------
// Evolution

std::optional<std::size_t> SolutionPath::row_of_step(int n) const {
  auto it = std::lower_bound(recorded_steps.begin(), recorded_steps.end(), n);
  if (it == recorded_steps.end() || *it != n) return std::nullopt;
  return static_cast<std::size_t>(it - recorded_steps.begin());
}

SolutionPath evolve(const ProblemSpec& spec, const GridSpec& grid, const NoiseSource& noise,
                    std::span<const double> stop_levels, const EvolveOptions& options) {
  if (options.validate) spec.validate(grid);
  const GridSpec& ng = noise.grid();
  if (ng.n_x != grid.n_x || ng.n_t != grid.n_t || std::abs(ng.dx() - grid.dx()) > 1e-12 * grid.dx() ||
      std::abs(ng.dt() - grid.dt()) > 1e-12 * grid.dt())
    throw ArgumentError("evolve: noise grid does not match the solution grid");
  if (options.record_stride < 1) throw ArgumentError("evolve: record_stride must be positive");

  SolutionPath sol;
  sol.grid = grid;
  sol.row_size = grid.state_size();
  sol.negativity_tolerance =
      options.negativity_tolerance >= 0.0 ? options.negativity_tolerance : noise_floor_tolerance(spec, grid);
  for (double R : stop_levels) sol.hitting_times[R] = std::nullopt;

  std::vector<double> u = spec.u0.sample(grid);
  const double dx = grid.dx();

  auto observe = [&](int n) {
    double mass = 0.0, signed_mass = 0.0, sup = 0.0, lo = INFINITY;
    bool finite = true;
    for (double v : u) {
      if (!std::isfinite(v)) finite = false;
      const double a = std::abs(v);
      mass += a;
      signed_mass += v;
      sup = std::max(sup, a);
      lo = std::min(lo, v);
      if (n >= options.burn_in_step && v < -sol.negativity_tolerance) ++sol.negative_points;
    }
    if (!finite) sup = INFINITY;
    sol.mass_series.push_back(mass * dx);
    sol.signed_mass_series.push_back(signed_mass * dx);
    sol.sup_series.push_back(sup);
    sol.min_series.push_back(lo);
    for (auto& [R, hit] : sol.hitting_times)
      if (!hit && sup >= R) hit = n;
    if (!finite || sup > kExplosionThreshold) {
      sol.exploded = true;
      sol.explosion_step = n;
    }
  };
  auto record = [&](int n) {
    if (!options.keep_states) return;
    sol.recorded_steps.push_back(n);
    sol.states.insert(sol.states.end(), u.begin(), u.end());
  };

  observe(0);
  record(0);
  if (sol.exploded) return sol;

  Stepper stepper(spec, grid, grid.dt());
  std::vector<double> row(grid.n_x);
  for (int n = 0; n < grid.n_t; ++n) {
    noise.row(n, row);
    sol.sigma_max = std::max(sol.sigma_max, stepper.advance(u, grid.t(n), row));
    observe(n + 1);
    if (sol.exploded || (n + 1) % options.record_stride == 0 || n + 1 == grid.n_t) record(n + 1);
    if (sol.exploded) break;
  }
  return sol;
}

void write_trajectory_csv(const std::filesystem::path& path, const SolutionPath& sol) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  out << "t,x,u\n";
  for (std::size_t k = 0; k < sol.n_recorded(); ++k) {
    const double t = sol.grid.t(sol.recorded_steps[k]);
    auto row = sol.state(k);
    for (int j = 0; j < sol.row_size; ++j) out << t << ',' << sol.grid.x(j) << ',' << row[j] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_trajectory_dump(const std::filesystem::path& path, const SolutionPath& sol) {
  io::BinaryWriter w(path);
  w.magic("SPTH");
  w.u32(1);
  w.u64(sol.n_recorded());
  w.u64(static_cast<std::uint64_t>(sol.row_size));
  w.f64(sol.grid.dx());
  const int stride = sol.n_recorded() > 1 ? sol.recorded_steps[1] - sol.recorded_steps[0] : 1;
  w.f64(sol.grid.dt() * stride);
  w.f64s(sol.states);
  w.finish();
}

}  // namespace sgb
