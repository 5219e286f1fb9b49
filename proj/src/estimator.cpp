#include "sgb/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sgb/error.hpp"
#include "sgb/rng.hpp"

namespace sgb {

std::string_view to_string(Direction d) { return d == Direction::time ? "time" : "space"; }

FieldSamples FieldSamples::of(const SolutionPath& path) {
  FieldSamples f;
  f.values = path.states;
  f.row_size = static_cast<std::size_t>(path.row_size);
  f.steps = path.recorded_steps;
  f.dt = path.grid.dt();
  f.dx = path.grid.dx();
  f.x_min = path.grid.x_min;
  return f;
}

void check_estimator_settings(const EstimatorSettings& s, double x_min, double x_max, double t_end) {
  if (s.lags.size() < 3) throw ArgumentError("structure function needs at least 3 lags");
  for (int l : s.lags)
    if (l <= 0) throw ArgumentError("lags must be positive");
  if (!(s.q > 0.0)) throw ArgumentError("moment order q must be positive");
  if (!(s.burn_in > 0.0)) throw ArgumentError("burn-in time must be positive");
  const Window& w = s.window;
  if (!(w.t0 < w.t1) || !(w.x0 < w.x1)) throw ArgumentError("window must have positive extent");
  if (w.t0 < s.burn_in) throw ArgumentError("window starts before the burn-in time");
  if (w.t1 > t_end * (1 + 1e-12)) throw ArgumentError("window ends after the final time");
  if (!(w.x0 > x_min) || !(w.x1 < x_max)) throw ArgumentError("window touches the spatial boundary");
}

namespace {

inline double abs_pow(double d, double q) {
  const double a = std::abs(d);
  if (q == 2.0) return a * a;
  if (q == 1.0) return a;
  return std::pow(a, q);
}

struct ColumnRange {
  std::size_t lo = 0, hi = 0;  // inclusive
  bool empty = true;
};

ColumnRange columns_in(const FieldSamples& f, double x0, double x1) {
  ColumnRange r;
  const double eps = 1e-9;
  const double a = std::ceil((x0 - f.x_min) / f.dx - eps);
  const double b = std::floor((x1 - f.x_min) / f.dx + eps);
  const double top = static_cast<double>(f.row_size) - 1.0;
  const double lo = std::max(a, 0.0), hi = std::min(b, top);
  if (lo > hi) return r;
  r.lo = static_cast<std::size_t>(lo);
  r.hi = static_cast<std::size_t>(hi);
  r.empty = false;
  return r;
}

bool time_inside(const FieldSamples& f, int step, const Window& w) {
  const double t = step * f.dt;
  const double eps = 1e-9 * f.dt;
  return t >= w.t0 - eps && t <= w.t1 + eps;
}

}  // namespace

PathStructure path_structure(const FieldSamples& f, const EstimatorSettings& s) {
  const std::size_t nl = s.lags.size();
  PathStructure ps{std::vector<double>(nl, 0.0), std::vector<std::size_t>(nl, 0), std::vector<double>(nl, 0.0)};
  if (f.row_size == 0) return ps;
  const std::size_t rows = f.steps.size();
  if (f.values.size() < rows * f.row_size) throw ArgumentError("field samples are shorter than their row count");
  const ColumnRange cols = columns_in(f, s.window.x0, s.window.x1);
  if (cols.empty) return ps;

  for (std::size_t li = 0; li < nl; ++li) {
    const auto lag = static_cast<std::size_t>(s.lags[li]);
    double sum = 0.0, mx = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!time_inside(f, f.steps[r], s.window)) continue;
      const double* a = f.values.data() + r * f.row_size;
      if (s.direction == Direction::space) {
        if (cols.lo + lag > cols.hi) break;
        for (std::size_t j = cols.lo; j + lag <= cols.hi; ++j) {
          const double d = a[j + lag] - a[j];
          sum += abs_pow(d, s.q);
          mx = std::max(mx, std::abs(d));
        }
        count += cols.hi - lag - cols.lo + 1;
      } else {
        const int target = f.steps[r] + static_cast<int>(lag);
        const auto it = std::lower_bound(f.steps.begin() + static_cast<std::ptrdiff_t>(r), f.steps.end(), target);
        if (it == f.steps.end() || *it != target || !time_inside(f, target, s.window)) continue;
        const double* b = f.values.data() + static_cast<std::size_t>(it - f.steps.begin()) * f.row_size;
        for (std::size_t j = cols.lo; j <= cols.hi; ++j) {
          const double d = b[j] - a[j];
          sum += abs_pow(d, s.q);
          mx = std::max(mx, std::abs(d));
        }
        count += cols.hi - cols.lo + 1;
      }
    }
    ps.sums[li] = sum;
    ps.counts[li] = count;
    ps.max_abs[li] = mx;
  }
  return ps;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("ols_slope needs two or more matching points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw ArgumentError("ols_slope: abscissae are all equal");
  return sxy / sxx;
}

std::vector<int> dyadic_lags(int min_lag, int max_lag) {
  if (min_lag < 1) throw ArgumentError("dyadic_lags: min_lag must be positive");
  std::vector<int> out;
  for (long l = min_lag; l <= max_lag; l *= 2) out.push_back(static_cast<int>(l));
  return out;
}

namespace {

// Exponent from pooled sums; NaN when some lag has no positive structure value.
double pooled_exponent(std::span<const double> log_lags, std::span<const double> sums,
                       std::span<const double> counts, double q, std::vector<double>* values = nullptr) {
  std::vector<double> y(sums.size());
  bool ok = true;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const double v = counts[i] > 0 ? sums[i] / counts[i] : 0.0;
    if (values) (*values)[i] = v;
    if (!(v > 0.0)) ok = false;
    y[i] = ok ? std::log(v) : 0.0;
  }
  if (!ok) return std::nan("");
  return ols_slope(log_lags, y) / q;
}

double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) return std::nan("");
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

}  // namespace

EstimatorReport structure_from_accumulators(std::span<const PathStructure> per_path, const EstimatorSettings& s,
                                            double lag_unit) {
  if (s.lags.size() < 3) throw ArgumentError("structure function needs at least 3 lags");
  if (per_path.size() < s.min_paths)
    throw ArgumentError("structure function needs at least " + std::to_string(s.min_paths) + " paths, got " +
                        std::to_string(per_path.size()));
  const std::size_t nl = s.lags.size();
  const std::size_t np = per_path.size();
  for (const auto& p : per_path)
    if (p.sums.size() != nl || p.counts.size() != nl) throw ArgumentError("accumulator does not match the lag list");

  std::vector<double> log_lags(nl);
  for (std::size_t i = 0; i < nl; ++i) log_lags[i] = std::log(static_cast<double>(s.lags[i]));

  std::vector<double> sums(nl, 0.0), counts(nl, 0.0);
  for (const auto& p : per_path)
    for (std::size_t i = 0; i < nl; ++i) {
      sums[i] += p.sums[i];
      counts[i] += static_cast<double>(p.counts[i]);
    }
  for (std::size_t i = 0; i < nl; ++i)
    if (counts[i] == 0.0)
      throw ArgumentError("no increment pairs inside the window at lag " + std::to_string(s.lags[i]));

  EstimatorReport rep;
  rep.direction = s.direction;
  rep.lags = s.lags;
  rep.lag_unit = lag_unit;
  rep.q = s.q;
  rep.window = s.window;
  rep.n_paths = np;
  rep.structure_values.assign(nl, 0.0);
  rep.exponent_hat = pooled_exponent(log_lags, sums, counts, s.q, &rep.structure_values);

  const GaussianStream rng(s.bootstrap_seed, 0, StreamTag::bootstrap);
  const auto B = static_cast<std::ptrdiff_t>(s.bootstrap_replicates);
  std::vector<double> boot(static_cast<std::size_t>(B));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < B; ++b) {
    std::vector<double> bs(nl, 0.0), bc(nl, 0.0);
    for (std::size_t k = 0; k < np; ++k) {
      auto pick = static_cast<std::size_t>(rng.uniform(static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(k)) *
                                           static_cast<double>(np));
      pick = std::min(pick, np - 1);
      const auto& p = per_path[pick];
      for (std::size_t i = 0; i < nl; ++i) {
        bs[i] += p.sums[i];
        bc[i] += static_cast<double>(p.counts[i]);
      }
    }
    boot[static_cast<std::size_t>(b)] = pooled_exponent(log_lags, bs, bc, s.q);
  }
  boot.erase(std::remove_if(boot.begin(), boot.end(), [](double v) { return !std::isfinite(v); }), boot.end());
  std::sort(boot.begin(), boot.end());
  const double alpha = 0.5 * (1.0 - s.confidence);
  rep.ci_low = quantile_sorted(boot, alpha);
  rep.ci_high = quantile_sorted(boot, 1.0 - alpha);
  // A percentile interval can miss a skewed point estimate; keep the estimate inside.
  if (std::isfinite(rep.exponent_hat)) {
    if (!(rep.ci_low <= rep.exponent_hat)) rep.ci_low = rep.exponent_hat;
    if (!(rep.ci_high >= rep.exponent_hat)) rep.ci_high = rep.exponent_hat;
  }

  std::vector<double> med(nl);
  bool med_ok = true;
  for (std::size_t i = 0; i < nl; ++i) {
    std::vector<double> v;
    v.reserve(np);
    for (const auto& p : per_path)
      if (i < p.max_abs.size()) v.push_back(p.max_abs[i]);
    std::sort(v.begin(), v.end());
    med[i] = quantile_sorted(v, 0.5);
    if (!(med[i] > 0.0)) med_ok = false;
    med[i] = med_ok ? std::log(med[i]) : 0.0;
  }
  rep.oscillation_exponent = med_ok ? ols_slope(log_lags, med) : std::nan("");
  return rep;
}

EstimatorReport structure_function(std::span<const SolutionPath> paths, const EstimatorSettings& s) {
  if (paths.empty()) throw ArgumentError("structure function needs at least " + std::to_string(s.min_paths) + " paths");
  const GridSpec& g = paths.front().grid;
  check_estimator_settings(s, g.x_min, g.x_max, g.t_end);
  std::vector<PathStructure> acc(paths.size());
  const auto n = static_cast<std::ptrdiff_t>(paths.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] = path_structure(FieldSamples::of(paths[i]), s);
  return structure_from_accumulators(acc, s, s.direction == Direction::time ? g.dt() : g.dx());
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json EstimatorReport::to_json() const {
  nlohmann::json j;
  j["direction"] = std::string(to_string(direction));
  j["lags"] = lags;
  j["lag_unit"] = lag_unit;
  j["structure_values"] = structure_values;
  j["q"] = q;
  j["exponent_hat"] = number_or_null(exponent_hat);
  j["ci_low"] = number_or_null(ci_low);
  j["ci_high"] = number_or_null(ci_high);
  j["window"] = {{"t0", window.t0}, {"t1", window.t1}, {"x0", window.x0}, {"x1", window.x1}};
  j["n_paths"] = n_paths;
  j["oscillation_exponent"] = number_or_null(oscillation_exponent);
  return j;
}

void write_structure_csv(const std::filesystem::path& path, std::span<const EstimatorReport> reports) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  out << "lag,Sq,direction,q\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.lags.size(); ++i)
      out << r.lags[i] * r.lag_unit << ',' << r.structure_values[i] << ',' << to_string(r.direction) << ',' << r.q
          << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Verification

namespace {

void require_matching_grids(std::span<const ExponentInput> inputs) {
  if (inputs.empty()) throw ArgumentError("exponent verification needs at least one ensemble");
  for (const auto& in : inputs)
    if (!(in.grid == inputs.front().grid)) throw ArgumentError("exponent ensembles use mismatched grids");
}

ExponentCell make_cell(const ExponentInput& in, double space_target, double tolerance) {
  ExponentCell c;
  c.lambda = in.spec.lambda;
  c.lambda0 = in.spec.lambda0;
  c.space_target = space_target;
  c.time_target = space_target / 2.0;
  c.space_hat = in.space.exponent_hat;
  c.space_low = in.space.ci_low;
  c.space_high = in.space.ci_high;
  c.time_hat = in.time.exponent_hat;
  c.time_low = in.time.ci_low;
  c.time_high = in.time.ci_high;
  c.space_lower_ok = c.space_hat >= c.space_target - tolerance;
  c.time_lower_ok = c.time_hat >= c.time_target - tolerance;
  c.space_band_ok = std::abs(c.space_hat - c.space_target) <= tolerance;
  c.time_band_ok = std::abs(c.time_hat - c.time_target) <= tolerance;
  return c;
}

void cross_cell_spread(ExponentReport& r) {
  r.max_pairwise_space_diff = 0.0;
  r.space_cis_overlap = true;
  for (std::size_t i = 0; i < r.cells.size(); ++i)
    for (std::size_t k = i + 1; k < r.cells.size(); ++k) {
      const auto& a = r.cells[i];
      const auto& b = r.cells[k];
      r.max_pairwise_space_diff = std::max(r.max_pairwise_space_diff, std::abs(a.space_hat - b.space_hat));
      if (std::max(a.space_low, b.space_low) > std::min(a.space_high, b.space_high)) r.space_cis_overlap = false;
    }
}

}  // namespace

ExponentReport verify_case1_exponents(std::span<const ExponentInput> inputs, double tolerance) {
  require_matching_grids(inputs);
  ExponentReport r;
  r.regime = Regime::case1_bounded_lipschitz;
  r.tolerance = tolerance;
  for (const auto& in : inputs) r.cells.push_back(make_cell(in, 0.5, tolerance));
  cross_cell_spread(r);
  r.pass = r.space_cis_overlap;
  for (const auto& c : r.cells) r.pass = r.pass && c.space_band_ok && c.time_band_ok;
  return r;
}

double case2_space_target(double lambda, double lambda0) {
  return 0.5 - std::max(std::max(lambda - 0.5, 0.0), lambda0);
}

ExponentReport verify_case2_exponents(std::span<const ExponentInput> inputs, double tolerance) {
  require_matching_grids(inputs);
  for (const auto& in : inputs) {
    if (!(in.spec.lambda > 0.0 && in.spec.lambda < 1.0))
      throw ArgumentError("super-linear regime requires λ∈(0,1), got lambda = " + std::to_string(in.spec.lambda));
    if (!(in.spec.lambda0 >= 0.0 && in.spec.lambda0 < 0.5))
      throw ArgumentError("super-linear regime requires λ_0∈[0,1/2), got lambda0 = " +
                          std::to_string(in.spec.lambda0));
  }
  ExponentReport r;
  r.regime = Regime::case2_superlinear;
  r.tolerance = tolerance;
  for (const auto& in : inputs)
    r.cells.push_back(make_cell(in, case2_space_target(in.spec.lambda, in.spec.lambda0), tolerance));
  cross_cell_spread(r);
  r.pass = true;
  for (const auto& c : r.cells) r.pass = r.pass && c.space_lower_ok;
  return r;
}

nlohmann::json ExponentReport::to_json() const {
  nlohmann::json j;
  j["regime"] = std::string(to_string(regime));
  j["tolerance"] = tolerance;
  auto arr = nlohmann::json::array();
  for (const auto& c : cells)
    arr.push_back({{"lambda", c.lambda},
                   {"lambda0", c.lambda0},
                   {"space", {{"target", c.space_target},
                              {"exponent_hat", number_or_null(c.space_hat)},
                              {"ci_low", number_or_null(c.space_low)},
                              {"ci_high", number_or_null(c.space_high)},
                              {"lower_ok", c.space_lower_ok},
                              {"band_ok", c.space_band_ok}}},
                   {"time", {{"target", c.time_target},
                             {"exponent_hat", number_or_null(c.time_hat)},
                             {"ci_low", number_or_null(c.time_low)},
                             {"ci_high", number_or_null(c.time_high)},
                             {"lower_ok", c.time_lower_ok},
                             {"band_ok", c.time_band_ok}}}});
  j["cells"] = arr;
  j["max_pairwise_space_diff"] = max_pairwise_space_diff;
  j["space_cis_overlap"] = space_cis_overlap;
  j["pass"] = pass;
  return j;
}

MassBoundReport mass_bound_check(const EnsembleSummary& summary, const ProblemSpec& spec, const GridSpec& grid,
                                 double margin) {
  MassBoundReport r;
  r.regime = spec.regime;
  const double K = spec.K, T = grid.t_end;
  if (spec.regime == Regime::case1_bounded_lipschitz) {
    r.statistic = "E int_0^T ||u||_L1 dt";
    r.mean = summary.integrated_mass.mean;
    r.stderr_ = summary.integrated_mass.stderr_;
    r.bound = T * std::exp(4.0 * K * T) * (1.0 + margin) * summary.initial_mass.mean;
  } else {
    r.statistic = "E sup_t ||u||_L1^(1/2)";
    r.mean = summary.sup_sqrt_mass.mean;
    r.stderr_ = summary.sup_sqrt_mass.stderr_;
    r.bound = 3.0 * std::exp(2.0 * K * T) * summary.sqrt_initial_mass.mean;
  }
  r.pass = r.mean + 3.0 * r.stderr_ <= r.bound;
  return r;
}

nlohmann::json MassBoundReport::to_json() const {
  return {{"regime", std::string(to_string(regime))},
          {"statistic", statistic},
          {"mean", mean},
          {"stderr", stderr_},
          {"bound", bound},
          {"pass", pass}};
}

std::pair<double, double> wilson_interval(std::size_t count, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(count) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

NonexplosionReport nonexplosion_curve(std::span<const EnsembleSummary> summaries,
                                      std::span<const std::string> labels, double uniform_up_to) {
  if (summaries.empty()) throw ArgumentError("nonexplosion_curve needs at least one ensemble");
  const auto& levels = summaries.front().per_level;
  if (levels.size() < 3) throw ArgumentError("nonexplosion_curve needs at least 3 levels R");
  NonexplosionReport rep;
  rep.uniform_up_to = uniform_up_to;
  for (std::size_t s = 0; s < summaries.size(); ++s) {
    const auto& sum = summaries[s];
    if (sum.per_level.size() != levels.size()) throw ArgumentError("ensembles use different stop levels");
    ExceedanceCurve c;
    c.label = s < labels.size() ? labels[s] : std::to_string(s);
    for (std::size_t i = 0; i < sum.per_level.size(); ++i) {
      const auto& l = sum.per_level[i];
      if (l.R != levels[i].R) throw ArgumentError("ensembles use different stop levels");
      ExceedancePoint p;
      p.R = l.R;
      p.count = l.count;
      p.n = sum.n_paths;
      p.p = l.p_exceed;
      std::tie(p.ci_low, p.ci_high) = wilson_interval(p.count, p.n);
      c.points.push_back(p);
    }
    std::vector<ExceedancePoint> by_r = c.points;
    std::sort(by_r.begin(), by_r.end(), [](const auto& a, const auto& b) { return a.R < b.R; });
    for (std::size_t i = 1; i < by_r.size(); ++i)
      if (by_r[i].p > by_r[i - 1].p) c.nonincreasing = false;
    rep.curves.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    double lo = 0.0, hi = 1.0, sup = 0.0;
    for (const auto& c : rep.curves) {
      lo = std::max(lo, c.points[i].ci_low);
      hi = std::min(hi, c.points[i].ci_high);
      sup = std::max(sup, c.points[i].p);
    }
    rep.curves_agree.push_back(lo <= hi);
    if (lo > hi && levels[i].R <= uniform_up_to) rep.uniform_across_curves = false;
    rep.sup_p.push_back(sup);
  }
  rep.pass = rep.uniform_across_curves;
  for (const auto& c : rep.curves) rep.pass = rep.pass && c.nonincreasing;
  return rep;
}

nlohmann::json NonexplosionReport::to_json() const {
  nlohmann::json j;
  auto arr = nlohmann::json::array();
  for (const auto& c : curves) {
    auto pts = nlohmann::json::array();
    for (const auto& p : c.points)
      pts.push_back({{"R", p.R}, {"count", p.count}, {"n", p.n}, {"p", p.p}, {"ci_low", p.ci_low},
                     {"ci_high", p.ci_high}});
    arr.push_back({{"label", c.label}, {"points", pts}, {"nonincreasing", c.nonincreasing}});
  }
  j["curves"] = arr;
  j["uniform_up_to"] = number_or_null(uniform_up_to);
  j["curves_agree"] = curves_agree;
  j["uniform_across_curves"] = uniform_across_curves;
  j["sup_p"] = sup_p;
  j["pass"] = pass;
  return j;
}

}  // namespace sgb
