#include "sgb/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "sgb/ensemble.hpp"
#include "sgb/error.hpp"
#include "sgb/estimator.hpp"
#include "sgb/io.hpp"
#include "sgb/kernelspace.hpp"
#include "sgb/rng.hpp"
#include "sgb/solver.hpp"

namespace sgb {

using nlohmann::json;

namespace {

struct Context {
  const ExperimentConfig& cfg;
  std::optional<std::filesystem::path> dir;

  std::optional<std::filesystem::path> file(const std::string& name) const {
    if (!dir) return std::nullopt;
    return *dir / name;
  }
};

EnsembleOptions ensemble_options(const ExperimentConfig& cfg, const GridSpec& grid) {
  EnsembleOptions o;
  o.n_paths = cfg.n_paths;
  o.master_seed = cfg.master_seed;
  o.stop_levels = cfg.stop_levels;
  o.threads = cfg.threads;
  o.burn_in_time = cfg.burn_in_fraction * grid.t_end;
  o.noise = cfg.noise;
  o.series_modes = cfg.series_modes;
  o.evolve.record_stride = std::max(1, cfg.record_stride);
  return o;
}

std::string tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// noise-validate

json covariance_json(const CovarianceReport& r) {
  auto arr = json::array();
  for (const auto& p : r.probes)
    arr.push_back({{"A", {p.pair.a.t0, p.pair.a.t1, p.pair.a.x0, p.pair.a.x1}},
                   {"B", {p.pair.b.t0, p.pair.b.t1, p.pair.b.x0, p.pair.b.x1}},
                   {"empirical", p.empirical},
                   {"target", p.target},
                   {"stderr", p.stderr_},
                   {"z", p.z}});
  return {{"n_fields", r.n_fields}, {"probes", arr}, {"max_abs_z", r.max_abs_z()}};
}

json run_noise_validate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec grid = cfg.resolved_grid();
  const auto pairs = default_probe_pairs(grid);
  const std::uint64_t seed = cfg.master_seed;

  const NoiseFactory rect = [&](std::size_t i) -> std::unique_ptr<NoiseSource> {
    return std::make_unique<RectangleNoiseStream>(grid, seed, static_cast<std::uint32_t>(i));
  };
  const auto t0 = std::chrono::steady_clock::now();
  const CovarianceReport rep_rect = validate_covariance(cfg.n_fields, rect, pairs);
  const double rect_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const int modes = cfg.series_modes > 0 ? cfg.series_modes : grid.n_x;
  const BasisFamily basis = BasisFamily::default_for(grid, modes);
  // Independent draws for the series ensemble: offset the stream range.
  const auto offset = static_cast<std::uint32_t>(cfg.n_fields);
  const NoiseFactory series = [&](std::size_t i) -> std::unique_ptr<NoiseSource> {
    return std::make_unique<SeriesNoiseStream>(grid, basis, seed, offset + static_cast<std::uint32_t>(i));
  };
  const auto t1 = std::chrono::steady_clock::now();
  const CovarianceReport rep_series = validate_covariance(cfg.n_fields, series, pairs);
  const double series_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

  const auto z = covariance_discrepancy(rep_rect, rep_series);
  double max_z = 0.0;
  for (double v : z) max_z = std::max(max_z, std::abs(v));

  // Single-cell increments: variance dt dx and Gaussian kurtosis.
  const auto field = generate_rectangle_noise(GridSpec{grid.x_min, grid.x_max, grid.n_x, grid.dt() * 64, 64,
                                                       grid.boundary},
                                              seed, 0xffffffffu);
  const MomentSummary mom = sample_moments(field.increments());

  const bool cov_ok = rep_rect.max_abs_z() <= 4.0;
  const bool eq_ok = max_z <= 5.0;
  return {{"covariance", covariance_json(rep_rect)},
          {"covariance_pass", cov_ok},
          {"covariance_seconds", rect_seconds},
          {"series", covariance_json(rep_series)},
          {"series_modes", modes},
          {"series_vs_rectangle_z", z},
          {"series_vs_rectangle_max_abs_z", max_z},
          {"series_pass", eq_ok},
          {"series_seconds", series_seconds},
          {"cell_moments",
           {{"variance", mom.variance},
            {"variance_target", grid.dt() * grid.dx()},
            {"variance_stderr", mom.variance_stderr},
            {"kurtosis", mom.kurtosis},
            {"kurtosis_stderr", mom.kurtosis_stderr}}},
          {"pass", cov_ok && eq_ok}};
}

// ---------------------------------------------------------------------------
// heat-oracle

json run_heat_oracle(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec grid = cfg.resolved_grid();
  ProblemSpec spec = cfg.spec;
  spec.regime = Regime::case1_bounded_lipschitz;
  spec.sigma_case1.kind = Sigma1Kind::zero;
  auto is_zero = [](const Coefficient& k) { return k.is_constant() && k.constant_value() == 0.0; };
  if (!spec.coeff_a.is_constant() || !is_zero(spec.coeff_b) || !is_zero(spec.coeff_c) || !is_zero(spec.coeff_bbar))
    throw ConfigError("heat-oracle needs constant a and b = c = bbar = 0");
  if (spec.u0.kind != InitialData::Kind::gaussian_bump) throw ConfigError("heat-oracle needs a bump initial datum");

  const ZeroNoise noise(grid);
  EvolveOptions ev;
  ev.record_stride = grid.n_t;
  const auto t0 = std::chrono::steady_clock::now();
  const SolutionPath path = evolve(spec, grid, noise, {}, ev);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto u = path.state(path.n_recorded() - 1);

  // Gaussian of variance w^2 spreads to w^2 + 2 a T, summed over periodic images.
  const double a = spec.coeff_a.constant_value();
  const double w2 = spec.u0.width * spec.u0.width;
  const double s2 = w2 + 2.0 * a * grid.t_end;
  const double L = grid.length();
  double num = 0.0, den = 0.0;
  for (int j = 0; j < grid.state_size(); ++j) {
    double exact = 0.0;
    for (int img = -3; img <= 3; ++img) {
      const double d = grid.x(j) - spec.u0.center + img * L;
      exact += spec.u0.level * std::sqrt(w2 / s2) * std::exp(-0.5 * d * d / s2);
    }
    num += (u[j] - exact) * (u[j] - exact);
    den += exact * exact;
  }
  const double err = std::sqrt(num / den);
  return {{"relative_l2_error", err}, {"threshold", 1e-3}, {"solver_seconds", seconds}, {"pass", err <= 1e-3}};
}

// ---------------------------------------------------------------------------
// Exponent sweeps

struct CellEstimates {
  ExponentInput input;
  EstimatorReport space_check;  // q_check cross-check
};

CellEstimates estimate_cell(const Context& ctx, const ProblemSpec& spec, const GridSpec& grid,
                            const std::string& label) {
  const auto& cfg = ctx.cfg;
  EnsembleOptions opt = ensemble_options(cfg, grid);
  const EstimatorSettings space = cfg.estimator(Direction::space);
  const EstimatorSettings time = cfg.estimator(Direction::time);
  EstimatorSettings check = space;
  check.q = cfg.q_check;
  check_estimator_settings(space, grid.x_min, grid.x_max, grid.t_end);
  check_estimator_settings(time, grid.x_min, grid.x_max, grid.t_end);

  std::vector<PathStructure> acc_space(opt.n_paths), acc_time(opt.n_paths), acc_check(opt.n_paths);
  const auto dump = cfg.dump_trajectories ? ctx.file("trajectory_" + label + ".bin") : std::nullopt;
  opt.evolve.keep_states = true;
  opt.on_path = [&](std::size_t i, const SolutionPath& path) {
    const FieldSamples f = FieldSamples::of(path);
    acc_space[i] = path_structure(f, space);
    acc_time[i] = path_structure(f, time);
    acc_check[i] = path_structure(f, check);
    if (i == 0 && dump) write_trajectory_dump(*dump, path);
  };
  run_ensemble(spec, grid, opt);

  CellEstimates out;
  out.input.spec = spec;
  out.input.grid = grid;
  out.input.space = structure_from_accumulators(acc_space, space, grid.dx());
  out.input.time = structure_from_accumulators(acc_time, time, grid.dt());
  out.space_check = structure_from_accumulators(acc_check, check, grid.dx());
  return out;
}

// Spatial exponent of one deterministic path started from a smooth bump.
EstimatorReport zero_noise_control(const ExperimentConfig& cfg, ProblemSpec spec, const GridSpec& grid) {
  spec.sigma_case1.kind = Sigma1Kind::zero;
  spec.mu = Coefficient::constant(0.0);
  spec.u0 = InitialData::parse("bump:1,0,4");
  EvolveOptions ev;
  ev.record_stride = std::max(1, cfg.record_stride);
  const ZeroNoise noise(grid);
  const SolutionPath path = evolve(spec, grid, noise, {}, ev);
  EstimatorSettings s = cfg.estimator(Direction::space);
  s.min_paths = 1;
  s.bootstrap_replicates = 0;
  const PathStructure ps = path_structure(FieldSamples::of(path), s);
  return structure_from_accumulators(std::span<const PathStructure>(&ps, 1), s, grid.dx());
}

json run_exponents(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec grid = cfg.resolved_grid();
  const bool case2 = cfg.spec.regime == Regime::case2_superlinear;
  const std::vector<double> lambdas = cfg.lambdas.empty() ? std::vector<double>{cfg.spec.lambda} : cfg.lambdas;
  const std::vector<double> lambda0s =
      case2 ? (cfg.lambda0s.empty() ? std::vector<double>{cfg.spec.lambda0} : cfg.lambda0s) : std::vector<double>{0.0};

  std::vector<ExponentInput> inputs;
  std::vector<EstimatorReport> csv;
  json cells = json::array();
  for (double lam : lambdas)
    for (double lam0 : lambda0s) {
      ProblemSpec spec = cfg.spec;
      spec.lambda = lam;
      if (case2) spec.lambda0 = lam0;
      spec.validate(grid);
      const std::string label = "lambda" + tag(lam) + (case2 ? "_lambda0" + tag(lam0) : "");
      const auto t0 = std::chrono::steady_clock::now();
      CellEstimates est = estimate_cell(ctx, spec, grid, label);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      cells.push_back({{"label", label},
                       {"lambda", lam},
                       {"lambda0", spec.lambda0},
                       {"space", est.input.space.to_json()},
                       {"time", est.input.time.to_json()},
                       {"space_q_check", est.space_check.to_json()},
                       {"seconds", seconds}});
      csv.push_back(est.input.space);
      csv.push_back(est.input.time);
      inputs.push_back(std::move(est.input));
    }

  const ExponentReport rep =
      case2 ? verify_case2_exponents(inputs, cfg.tolerance) : verify_case1_exponents(inputs, cfg.tolerance);
  const EstimatorReport control = zero_noise_control(cfg, inputs.front().spec, grid);
  if (auto f = ctx.file("structure.csv")) write_structure_csv(*f, csv);
  return {{"estimates", cells},
          {"verification", rep.to_json()},
          {"zero_noise_control", control.to_json()},
          {"pass", rep.pass}};
}

// ---------------------------------------------------------------------------
// mass-bounds (also carries the positivity counts of both regimes)

json positivity_json(const EnsembleSummary& s) {
  return {{"negative_points", s.negative_points},
          {"tolerance", s.negativity_tolerance},
          {"min_value", s.min_value},
          {"pass", s.negative_points == 0}};
}

json run_mass_bounds(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec grid = cfg.resolved_grid();
  const EnsembleOptions opt = ensemble_options(cfg, grid);

  ProblemSpec spec2 = cfg.spec;
  spec2.regime = Regime::case2_superlinear;
  const EnsembleSummary s2 = run_ensemble(spec2, grid, opt);
  const MassBoundReport b2 = mass_bound_check(s2, spec2, grid);

  ProblemSpec spec1 = cfg.spec;
  spec1.regime = Regime::case1_bounded_lipschitz;
  spec1.lambda = 1.0;
  spec1.cutoff_m.reset();
  const EnsembleSummary s1 = run_ensemble(spec1, grid, opt);
  const MassBoundReport b1 = mass_bound_check(s1, spec1, grid);

  // Without noise and reaction the flux form conserves the integral.
  ProblemSpec control = spec2;
  control.mu = Coefficient::constant(0.0);
  control.coeff_c = Coefficient::constant(0.0);
  EvolveOptions ev;
  ev.keep_states = false;
  const ZeroNoise zero(grid);
  const SolutionPath cp = evolve(control, grid, zero, {}, ev);
  const PathDiagnostics cd = diagnose(cp, {});
  double sup_mass = 0.0;
  for (double m : cp.mass_series) sup_mass = std::max(sup_mass, m);
  const double drift = cd.max_signed_mass_drift / cd.initial_mass;
  const bool conserved = drift <= 1e-8;

  return {{"case2", {{"bound", b2.to_json()}, {"summary", s2.to_json()}, {"positivity", positivity_json(s2)}}},
          {"case1", {{"bound", b1.to_json()}, {"summary", s1.to_json()}, {"positivity", positivity_json(s1)}}},
          {"zero_noise_control",
           {{"initial_mass", cd.initial_mass},
            {"sup_mass", sup_mass},
            {"relative_mass_drift", drift},
            {"pass", conserved}}},
          {"positivity_pass", s1.negative_points == 0 && s2.negative_points == 0},
          {"pass", b1.pass && b2.pass && conserved}};
}

// ---------------------------------------------------------------------------
// nonexplosion

json run_nonexplosion(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec grid = cfg.resolved_grid();
  if (cfg.stop_levels.size() < 3) throw ConfigError("nonexplosion needs at least 3 stop levels");
  const EnsembleOptions opt = ensemble_options(cfg, grid);
  const std::vector<double> levels = cfg.cutoff_levels.empty() ? std::vector<double>{16.0} : cfg.cutoff_levels;

  std::vector<EnsembleSummary> sums;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    ProblemSpec spec = cfg.spec;
    spec.regime = Regime::case2_superlinear;
    spec.cutoff_m = levels[i];
    // Independent noise per cut-off, so agreement below min m is a statistical test
    // rather than the pathwise identity checked by localization-consistency.
    EnsembleOptions opt_m = opt;
    opt_m.master_seed = cfg.master_seed + i;
    sums.push_back(run_ensemble(spec, grid, opt_m));
    labels.push_back("m=" + tag(levels[i]));
  }
  const double m_min = *std::min_element(levels.begin(), levels.end());
  const NonexplosionReport rep2 = nonexplosion_curve(sums, labels, m_min);

  ProblemSpec spec1 = cfg.spec;
  spec1.regime = Regime::case1_bounded_lipschitz;
  spec1.lambda = 1.0;
  spec1.cutoff_m.reset();
  const EnsembleSummary s1 = run_ensemble(spec1, grid, opt);
  const std::vector<std::string> l1 = {"case1"};
  const NonexplosionReport rep1 = nonexplosion_curve(std::span<const EnsembleSummary>(&s1, 1), l1);

  json expl = json::object();
  for (std::size_t i = 0; i < sums.size(); ++i) expl[labels[i]] = sums[i].explosion_fraction;
  expl["case1"] = s1.explosion_fraction;
  return {{"case2", rep2.to_json()},
          {"case1", rep1.to_json()},
          {"explosion_fraction", expl},
          {"pass", rep2.pass && rep1.pass}};
}

// ---------------------------------------------------------------------------
// kernel-checks

json run_kernel_checks(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  json integrals = json::array();
  bool integrals_ok = true;
  for (double g : {0.5, 1.0, 1.5, 2.0}) {
    const BesselKernelTable table(g);
    const double err = std::abs(table.integral() - 1.0);
    integrals_ok = integrals_ok && err <= 1e-6;
    integrals.push_back({{"gamma", g}, {"integral", table.integral()}, {"abs_error", err}});
  }

  // Slope on the singular range, well inside the auxiliary resolution.
  const KernelGridSpec fine{std::size_t{1} << 22, 64.0};
  std::vector<double> xs;
  for (int i = 0; i <= 16; ++i) xs.push_back(2e-4 * std::pow(5.0, i / 16.0));
  const BesselKernel k05 = bessel_kernel_eval(0.5, xs, fine);
  const double slope = loglog_slope(k05);
  const bool slope_ok = std::abs(slope + 0.5) <= 0.05;

  std::vector<std::size_t> sizes;
  for (int e = 14; e <= 20; ++e) sizes.push_back(std::size_t{1} << e);
  const RefinementStudy conv = kernel_l2_refinement(0.75, sizes);
  const RefinementStudy div = kernel_l2_refinement(0.5, sizes);
  const bool refine_ok = conv.converged && !div.converged;

  // Spectral identities on random periodic fields.
  const GridSpec g = cfg.resolved_grid();
  const GaussianStream rng(cfg.master_seed, 0, StreamTag::synthetic);
  const std::size_t n_fields = std::max<std::size_t>(cfg.n_paths, 1);
  double worst_iso = 0.0, worst_comp = 0.0;
  std::size_t violations = 0;
  for (std::size_t f = 0; f < n_fields; ++f) {
    const auto row = static_cast<std::uint32_t>(f);
    std::vector<double> u(static_cast<std::size_t>(g.n_x));
    rng.fill_normals(row, 0, u.data(), u.size());
    const double gamma = 2.0 * rng.uniform(row, 1000) - 0.5;
    const double nu = 2.0 * rng.uniform(row, 1001) - 1.0;
    const auto v = bessel_potential(u, g, nu);
    const double lhs = fractional_norm(v, g, gamma - nu, 2.0).value;
    const double rhs = fractional_norm(u, g, gamma, 2.0).value;
    worst_iso = std::max(worst_iso, std::abs(lhs - rhs) / rhs);

    const auto w = bessel_potential(v, g, gamma);
    const auto direct = bessel_potential(u, g, nu + gamma);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      num += (w[j] - direct[j]) * (w[j] - direct[j]);
      den += direct[j] * direct[j];
    }
    worst_comp = std::max(worst_comp, std::sqrt(num / den));

    const double g0 = 2.0 * rng.uniform(row, 1002) - 1.0;
    const double g1 = 2.0 * rng.uniform(row, 1003) - 1.0;
    const double eps = rng.uniform(row, 1004);
    const auto mi = check_multiplicative_inequality(u, g, {g0, g1}, {2.0, 2.0}, eps);
    violations += mi.holds ? 0 : 1;
  }
  const bool iso_ok = worst_iso <= 1e-10 && worst_comp <= 1e-10;
  const bool mult_ok = violations == 0;

  auto study = [](const RefinementStudy& r) {
    return json{{"gamma", r.gamma}, {"sizes", r.sizes}, {"values", r.values}, {"ratios", r.ratios},
                {"converged", r.converged}};
  };
  return {{"integrals", integrals},
          {"integrals_pass", integrals_ok},
          {"singular_slope", {{"gamma", 0.5}, {"slope", slope}, {"target", -0.5}, {"pass", slope_ok}}},
          {"l2_refinement", {{"kappa_0.25", study(conv)}, {"kappa_0", study(div)}, {"pass", refine_ok}}},
          {"spectral",
           {{"fields", n_fields},
            {"isometry_max_rel_error", worst_iso},
            {"composition_max_rel_error", worst_comp},
            {"isometry_pass", iso_ok},
            {"multiplicative_violations", violations},
            {"multiplicative_pass", mult_ok}}},
          {"pass", integrals_ok && slope_ok && refine_ok && iso_ok && mult_ok}};
}

// ---------------------------------------------------------------------------
// localization-consistency

json run_localization(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec grid = cfg.resolved_grid();
  std::vector<double> levels = cfg.cutoff_levels.empty() ? std::vector<double>{4.0, 8.0, 16.0} : cfg.cutoff_levels;
  std::sort(levels.begin(), levels.end());
  const double R = levels.front();

  std::vector<ProblemSpec> specs;
  for (double m : levels) {
    ProblemSpec s = cfg.spec;
    s.regime = Regime::case2_superlinear;
    s.cutoff_m = m;
    s.validate(grid);
    specs.push_back(s);
  }

  EnsembleOptions opt = ensemble_options(cfg, grid);
  opt.stop_levels = {R};
  opt.evolve.record_stride = 1;
  opt.evolve.keep_states = true;
  opt.evolve.validate = false;

  const auto n = static_cast<std::ptrdiff_t>(cfg.n_paths);
  std::vector<double> before(cfg.n_paths, 0.0), after(cfg.n_paths, 0.0);
  std::vector<int> hit(cfg.n_paths, -1);
  std::vector<char> same_hit(cfg.n_paths, 1);
  std::vector<std::exception_ptr> errors(cfg.n_paths);
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.threads > 0 ? cfg.threads : omp_get_max_threads())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      std::vector<SolutionPath> paths;
      for (const auto& s : specs) {
        const auto noise = ensemble_noise(grid, opt, static_cast<std::size_t>(i));
        paths.push_back(evolve(s, grid, *noise, opt.stop_levels, opt.evolve));
      }
      const auto tau = paths.front().hitting_times.at(R);
      const int last = tau ? *tau : paths.front().last_step();
      hit[i] = tau ? *tau : -1;
      for (std::size_t k = 1; k < paths.size(); ++k) {
        if (paths[k].hitting_times.at(R) != tau) same_hit[i] = 0;
        const int common = std::min(paths.front().last_step(), paths[k].last_step());
        for (int step = 0; step <= common; ++step) {
          const auto a = paths.front().state(*paths.front().row_of_step(step));
          const auto b = paths[k].state(*paths[k].row_of_step(step));
          double d = 0.0;
          for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
          if (step <= last)
            before[i] = std::max(before[i], d);
          else
            after[i] = std::max(after[i], d);
        }
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const double max_before = cfg.n_paths ? *std::max_element(before.begin(), before.end()) : 0.0;
  const double max_after = cfg.n_paths ? *std::max_element(after.begin(), after.end()) : 0.0;
  const auto n_hit = static_cast<std::size_t>(std::count_if(hit.begin(), hit.end(), [](int h) { return h >= 0; }));
  const bool hits_agree = std::all_of(same_hit.begin(), same_hit.end(), [](char c) { return c != 0; });
  const bool ok = max_before <= 1e-10 && hits_agree;
  return {{"cutoff_levels", levels},
          {"level", R},
          {"paths", cfg.n_paths},
          {"paths_reaching_level", n_hit},
          {"max_abs_diff_before_hitting", max_before},
          {"max_abs_diff_after_hitting", max_after},
          {"hitting_times_agree", hits_agree},
          {"hitting_steps", hit},
          {"pass", ok}};
}

}  // namespace

std::vector<RectPair> default_probe_pairs(const GridSpec& grid) {
  const double x = grid.x_min;
  auto R = [x](double t0, double t1, double x0, double x1) { return Rect{t0, t1, x + x0, x + x1}; };
  const double c = 1.0 / 64.0;
  return {
      {R(0, 1, 0, 1), R(0, 1, 0, 1)},                // identical
      {R(0, 2, 0, 2), R(1, 3, 1, 3)},                // corner overlap
      {R(0, 1, 0, 1), R(2, 3, 2, 3)},                // disjoint
      {R(0, 4, 0, 4), R(1, 2, 1, 2)},                // nested
      {R(0, 1, 0, 1), R(1, 2, 0, 1)},                // shared edge in time
      {R(0, c, 0, c), R(0, c, 0, c)},                // one cell
      {R(0, 4, 1.5, 2), R(1, 1.5, 0, 4)},            // crossing strips
      {R(0.5, 3.5, 0.25, 2.75), R(1.5, 4, 1, 4)},    // general overlap
      {R(0, 2, 2, 4), R(2, 4, 2, 4)},                // consecutive in time
      {R(0.25, 0.75, 3, 4), R(0, 1, 3.5, 3.75)},     // thin overlap
  };
}

namespace {

bool is_timing_key(const std::string& k) {
  return k == "seconds" || (k.size() > 8 && k.compare(k.size() - 8, 8, "_seconds") == 0);
}

void move_timings(json& node, const std::string& where, json& out) {
  if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) move_timings(node[i], where + "/" + std::to_string(i), out);
    return;
  }
  if (!node.is_object()) return;
  for (auto it = node.begin(); it != node.end();) {
    if (is_timing_key(it.key()) && it->is_number()) {
      out[where + "/" + it.key()] = *it;
      it = node.erase(it);
    } else {
      move_timings(*it, where + "/" + it.key(), out);
      ++it;
    }
  }
}

json compute_with_dir(const ExperimentConfig& cfg, std::optional<std::filesystem::path> dir) {
  const Context ctx{cfg, std::move(dir)};
  const auto t0 = std::chrono::steady_clock::now();
  json body;
  const std::string& e = cfg.experiment;
  if (e == "noise-validate")
    body = run_noise_validate(ctx);
  else if (e == "heat-oracle")
    body = run_heat_oracle(ctx);
  else if (e == "case1-exponents" || e == "case2-surface")
    body = run_exponents(ctx);
  else if (e == "mass-bounds")
    body = run_mass_bounds(ctx);
  else if (e == "nonexplosion")
    body = run_nonexplosion(ctx);
  else if (e == "kernel-checks")
    body = run_kernel_checks(ctx);
  else if (e == "localization-consistency")
    body = run_localization(ctx);
  else
    throw ConfigError("unknown experiment '" + e + "'");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json j;
  j["experiment"] = e;
  j["name"] = cfg.name;
  j["config_hash"] = cfg.hash_hex();
  j["master_seed"] = cfg.master_seed;
  j["code_version"] = kCodeVersion;
  j["config"] = cfg.serialize();
  j["pass"] = body.value("pass", false);
  // Wall-clock fields are the only ones that differ between identical runs; they
  // all live under "timestamp", keyed by their JSON pointer inside "result".
  json sections = json::object();
  move_timings(body, "", sections);
  j["result"] = std::move(body);
  j["timestamp"] = {{"runtime_seconds", seconds}, {"sections", sections}};
  return j;
}

}  // namespace

nlohmann::json compute_experiment(const ExperimentConfig& cfg) { return compute_with_dir(cfg, std::nullopt); }

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  const std::filesystem::path dir = cfg.output_dir / cfg.name;
  try {
    std::filesystem::create_directories(dir);
    const json report = compute_with_dir(cfg, dir);
    io::write_text(dir / "config.txt", cfg.serialize());
    io::write_text(dir / "report.json", report.dump(2) + "\n");
    log << cfg.name << ": " << (report["pass"].get<bool>() ? "pass" : "FAIL") << " (config " << cfg.hash_hex()
        << ", " << std::fixed << std::setprecision(1) << report["timestamp"]["runtime_seconds"].get<double>()
        << " s) -> " << (dir / "report.json").string() << "\n";
    return exit_ok;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return exit_runtime;
  }
}

namespace {

void render_flat(const json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) render_flat(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array() && !j.empty() && j.front().is_structured()) {
    for (std::size_t i = 0; i < j.size(); ++i) render_flat(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << "  " << std::left << std::setw(56) << prefix << " " << j.dump() << "\n";
  }
}

}  // namespace

std::string render_report(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_regular_file(dir)) {
    files.push_back(dir);
  } else {
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
      if (entry.path().filename() == "report.json") files.push_back(entry.path());
  }
  if (files.empty()) throw std::runtime_error("no report.json under " + dir.string());
  std::sort(files.begin(), files.end());
  std::ostringstream os;
  for (const auto& f : files) {
    const json j = json::parse(io::read_text(f));
    os << j.value("name", std::string("?")) << " [" << j.value("experiment", std::string("?")) << "] "
       << (j.value("pass", false) ? "pass" : "FAIL") << "  config " << j.value("config_hash", std::string("?"))
       << "  seed " << j.value("master_seed", std::uint64_t{0}) << "  version "
       << j.value("code_version", std::string("?")) << "\n";
    if (j.contains("result")) render_flat(j["result"], "", os);
    os << "\n";
  }
  return os.str();
}

}  // namespace sgb
