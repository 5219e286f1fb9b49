#include "sgb/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

#include <omp.h>

#include "sgb/error.hpp"

namespace sgb {

std::unique_ptr<NoiseSource> ensemble_noise(const GridSpec& grid, const EnsembleOptions& options, std::size_t index) {
  const auto stream = static_cast<std::uint32_t>(index);
  if (options.noise == NoiseConstruction::series_truncation) {
    const int modes = options.series_modes > 0 ? options.series_modes : grid.n_x;
    return std::make_unique<SeriesNoiseStream>(grid, BasisFamily::default_for(grid, modes), options.master_seed, stream);
  }
  return std::make_unique<RectangleNoiseStream>(grid, options.master_seed, stream);
}

namespace {

EvolveOptions path_evolve_options(const GridSpec& grid, const EnsembleOptions& options) {
  EvolveOptions ev = options.evolve;
  ev.validate = false;
  if (options.burn_in_time > 0.0)
    ev.burn_in_step = std::clamp(static_cast<int>(std::ceil(options.burn_in_time / grid.dt() - 1e-9)), 0, grid.n_t);
  if (!options.on_path) ev.keep_states = false;
  return ev;
}

SolutionPath run_one(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options,
                     const EvolveOptions& ev, std::size_t index) {
  const auto noise = ensemble_noise(grid, options, index);
  SolutionPath path = evolve(spec, grid, *noise, options.stop_levels, ev);
  path.seed = options.master_seed;
  path.path_index = static_cast<std::uint32_t>(index);
  return path;
}

Estimate estimate(const std::vector<double>& v) {
  Estimate e;
  if (v.empty()) return e;
  double s = 0;
  for (double x : v) s += x;
  e.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return e;
}

nlohmann::json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"stderr", e.stderr_}}; }

}  // namespace

SolutionPath simulate_path(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options,
                           std::size_t index) {
  spec.validate(grid);
  EvolveOptions ev = path_evolve_options(grid, options);
  ev.keep_states = options.evolve.keep_states;
  return run_one(spec, grid, options, ev, index);
}

PathDiagnostics diagnose(const SolutionPath& path, std::span<const double> stop_levels) {
  PathDiagnostics d;
  const auto& mass = path.mass_series;
  if (mass.empty()) return d;
  d.initial_mass = mass.front();
  const double dt = path.grid.dt();
  for (std::size_t n = 0; n < mass.size(); ++n) {
    d.sup_sqrt_mass = std::max(d.sup_sqrt_mass, std::sqrt(mass[n]));
    if (n > 0) d.integrated_mass += 0.5 * dt * (mass[n - 1] + mass[n]);
  }
  d.sup_abs = *std::max_element(path.sup_series.begin(), path.sup_series.end());
  d.min_value = INFINITY;
  for (double v : path.min_series) d.min_value = std::min(d.min_value, v);
  const double m0 = path.signed_mass_series.front();
  for (double m : path.signed_mass_series) d.max_signed_mass_drift = std::max(d.max_signed_mass_drift, std::abs(m - m0));
  d.sigma_max = path.sigma_max;
  d.negative_points = path.negative_points;
  d.exploded = path.exploded;
  for (double R : stop_levels) {
    auto it = path.hitting_times.find(R);
    d.hitting_steps.push_back(it != path.hitting_times.end() && it->second ? *it->second : -1);
  }
  return d;
}

EnsembleSummary summarize(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options,
                          std::vector<PathDiagnostics> paths) {
  EnsembleSummary s;
  s.n_paths = paths.size();
  s.master_seed = options.master_seed;
  s.spec_hash = spec_hash(spec);
  s.grid = grid;
  s.negativity_tolerance =
      options.evolve.negativity_tolerance >= 0.0 ? options.evolve.negativity_tolerance : noise_floor_tolerance(spec, grid);

  std::vector<double> ssm, im, sim, m0, sup;
  std::size_t exploded = 0;
  s.min_value = INFINITY;
  for (const auto& p : paths) {
    ssm.push_back(p.sup_sqrt_mass);
    im.push_back(p.integrated_mass);
    sim.push_back(std::sqrt(p.initial_mass));
    m0.push_back(p.initial_mass);
    sup.push_back(p.sup_abs);
    exploded += p.exploded ? 1 : 0;
    s.min_value = std::min(s.min_value, p.min_value);
    s.max_signed_mass_drift = std::max(s.max_signed_mass_drift, p.max_signed_mass_drift);
    s.sigma_max = std::max(s.sigma_max, p.sigma_max);
    s.negative_points += p.negative_points;
  }
  s.sup_sqrt_mass = estimate(ssm);
  s.integrated_mass = estimate(im);
  s.sqrt_initial_mass = estimate(sim);
  s.initial_mass = estimate(m0);
  s.sup_abs = estimate(sup);
  const double n = static_cast<double>(std::max<std::size_t>(paths.size(), 1));
  s.explosion_fraction = static_cast<double>(exploded) / n;
  for (double R : options.stop_levels) {
    LevelExceedance e;
    e.R = R;
    for (double v : sup) e.count += v > R ? 1 : 0;
    e.p_exceed = static_cast<double>(e.count) / n;
    e.stderr_ = std::sqrt(e.p_exceed * (1.0 - e.p_exceed) / n);
    s.per_level.push_back(e);
  }
  s.paths = std::move(paths);
  return s;
}

EnsembleSummary run_ensemble_serial(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options) {
  spec.validate(grid);
  const EvolveOptions ev = path_evolve_options(grid, options);
  std::vector<PathDiagnostics> diags(options.n_paths);
  for (std::size_t i = 0; i < options.n_paths; ++i) {
    const SolutionPath path = run_one(spec, grid, options, ev, i);
    if (options.on_path) options.on_path(i, path);
    diags[i] = diagnose(path, options.stop_levels);
  }
  return summarize(spec, grid, options, std::move(diags));
}

EnsembleSummary run_ensemble(const ProblemSpec& spec, const GridSpec& grid, const EnsembleOptions& options) {
  spec.validate(grid);
  const EvolveOptions ev = path_evolve_options(grid, options);
  std::vector<PathDiagnostics> diags(options.n_paths);
  std::vector<std::exception_ptr> errors(options.n_paths);
  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(options.n_paths);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const SolutionPath path = run_one(spec, grid, options, ev, static_cast<std::size_t>(i));
      if (options.on_path) options.on_path(static_cast<std::size_t>(i), path);
      diags[i] = diagnose(path, options.stop_levels);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return summarize(spec, grid, options, std::move(diags));
}

nlohmann::json to_json(const GridSpec& grid) {
  return {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"n_x", grid.n_x},
          {"t_end", grid.t_end}, {"n_t", grid.n_t},     {"boundary", std::string(to_string(grid.boundary))}};
}

nlohmann::json EnsembleSummary::to_json() const {
  nlohmann::json j;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(spec_hash));
  j["spec_hash"] = hash;
  j["n_paths"] = n_paths;
  j["master_seed"] = master_seed;
  j["grid"] = sgb::to_json(grid);
  j["aggregates"] = {{"sup_sqrt_mass", estimate_json(sup_sqrt_mass)},
                     {"integrated_mass", estimate_json(integrated_mass)},
                     {"sqrt_initial_mass", estimate_json(sqrt_initial_mass)},
                     {"initial_mass", estimate_json(initial_mass)},
                     {"sup_abs", estimate_json(sup_abs)},
                     {"explosion_fraction", explosion_fraction},
                     {"min_value", min_value},
                     {"max_signed_mass_drift", max_signed_mass_drift},
                     {"sigma_max", sigma_max},
                     {"negative_points", negative_points},
                     {"negativity_tolerance", negativity_tolerance}};
  auto levels = nlohmann::json::array();
  for (const auto& e : per_level)
    levels.push_back({{"R", e.R}, {"count", e.count}, {"p_exceed", e.p_exceed}, {"stderr", e.stderr_}});
  j["per_level"] = levels;
  return j;
}

}  // namespace sgb
