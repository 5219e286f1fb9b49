#include "sgb/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "sgb/error.hpp"
#include "sgb/fft.hpp"
#include "sgb/io.hpp"
#include "sgb/rng.hpp"

namespace sgb {

std::string_view to_string(NoiseConstruction c) {
  return c == NoiseConstruction::rectangle_increment ? "rectangle_increment" : "series_truncation";
}

std::string_view to_string(BasisKind k) { return k == BasisKind::trigonometric ? "trigonometric" : "haar"; }

// ---------------------------------------------------------------------------
// Basis

void BasisFamily::validate() const {
  domain.validate();
  if (n_modes < 1) throw ConfigError("basis: n_modes must be positive");
  if (n_modes > domain.n_x)
    throw ConfigError("basis: n_modes = " + std::to_string(n_modes) + " exceeds n_x = " +
                      std::to_string(domain.n_x) + " (aliased basis)");
  if (kind == BasisKind::haar && !std::has_single_bit(static_cast<unsigned>(domain.n_x)))
    throw ConfigError("basis: Haar family requires n_x to be a power of two");
}

BasisFamily BasisFamily::default_for(const GridSpec& grid, int n_modes) {
  return {grid.boundary == Boundary::periodic ? BasisKind::trigonometric : BasisKind::haar, n_modes, grid};
}

double BasisFamily::eval(int k, int j) const {
  const double L = domain.length();
  const int n = domain.n_x;
  if (kind == BasisKind::trigonometric) {
    if (k == 0) return 1.0 / std::sqrt(L);
    if (n % 2 == 0 && k == n - 1) return (j % 2 == 0 ? 1.0 : -1.0) / std::sqrt(L);
    const int m = (k + 1) / 2;
    const double phase = 2.0 * std::numbers::pi * m * j / n;
    return std::sqrt(2.0 / L) * (k % 2 == 1 ? std::cos(phase) : std::sin(phase));
  }
  if (k == 0) return 1.0 / std::sqrt(L);
  const int level = std::bit_width(static_cast<unsigned>(k)) - 1;  // k in [2^level, 2^{level+1})
  const int pos = k - (1 << level);
  const int block = n >> level;
  const int start = pos * block;
  if (j < start || j >= start + block) return 0.0;
  const double amp = std::sqrt(static_cast<double>(1 << level) / L);
  return j < start + block / 2 ? amp : -amp;
}

// ---------------------------------------------------------------------------
// Sources

void NoiseSource::row_range(int n, int j0, std::span<double> out) const {
  std::vector<double> full(grid().n_x);
  row(n, full);
  std::copy_n(full.begin() + j0, out.size(), out.begin());
}

NoiseField::NoiseField(GridSpec grid, std::vector<double> increments, std::uint64_t seed,
                       NoiseConstruction construction, int n_modes)
    : grid_(grid), increments_(std::move(increments)), seed_(seed), construction_(construction), n_modes_(n_modes) {
  if (increments_.size() != static_cast<std::size_t>(grid_.n_t) * grid_.n_x)
    throw ConfigError("NoiseField: increment array does not match grid");
}

std::span<const double> NoiseField::row_view(int n) const {
  return std::span<const double>(increments_).subspan(static_cast<std::size_t>(n) * grid_.n_x, grid_.n_x);
}

void NoiseField::row(int n, std::span<double> out) const {
  auto r = row_view(n);
  std::copy(r.begin(), r.end(), out.begin());
}

void NoiseField::row_range(int n, int j0, std::span<double> out) const {
  auto r = row_view(n).subspan(j0, out.size());
  std::copy(r.begin(), r.end(), out.begin());
}

RectangleNoiseStream::RectangleNoiseStream(GridSpec grid, std::uint64_t seed, std::uint32_t stream)
    : grid_(grid), seed_(seed), stream_(stream) {
  grid_.validate();
  scale_ = std::sqrt(grid_.dt() * grid_.dx());
}

void RectangleNoiseStream::row(int n, std::span<double> out) const { row_range(n, 0, out); }

void RectangleNoiseStream::row_range(int n, int j0, std::span<double> out) const {
  GaussianStream g(seed_, stream_, StreamTag::rectangle_noise);
  g.fill_normals(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(j0), out.data(), out.size());
  for (double& v : out) v *= scale_;
}

namespace {

// Fast synthesis of dx * sum_k eta_k(x_j) c_k for the trigonometric family.
void synthesize_trig(const BasisFamily& basis, std::span<const double> coeff, std::span<double> out) {
  const int n = basis.domain.n_x;
  const double L = basis.domain.length();
  const double dx = basis.domain.dx();
  auto& fft = thread_local_fft(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> spec(fft.spectrum_size(), {0.0, 0.0});
  const double c0 = 1.0 / std::sqrt(L);
  const double c1 = std::sqrt(2.0 / L) / 2.0;
  const int modes = static_cast<int>(coeff.size());
  for (int k = 0; k < modes; ++k) {
    if (k == 0) {
      spec[0] += coeff[0] * c0;
    } else if (n % 2 == 0 && k == n - 1) {
      spec[n / 2] += coeff[k] * c0;
    } else {
      const int m = (k + 1) / 2;
      if (k % 2 == 1)
        spec[m] += coeff[k] * c1;
      else
        spec[m] += std::complex<double>(0.0, -coeff[k] * c1);
    }
  }
  fft.inverse(spec, out);
  for (double& v : out) v *= dx;
}

void synthesize_haar(const BasisFamily& basis, std::span<const double> coeff, std::span<double> out) {
  const int n = basis.domain.n_x;
  const double L = basis.domain.length();
  const double dx = basis.domain.dx();
  const int modes = static_cast<int>(coeff.size());
  std::vector<double> a(n), b(n);
  a[0] = coeff[0] / std::sqrt(L);
  for (int width = 1; width < n; width *= 2) {
    const double amp = std::sqrt(static_cast<double>(width) / L);
    for (int p = 0; p < width; ++p) {
      const int k = width + p;
      const double d = k < modes ? coeff[k] * amp : 0.0;
      b[2 * p] = a[p] + d;
      b[2 * p + 1] = a[p] - d;
    }
    std::swap(a, b);
  }
  for (int j = 0; j < n; ++j) out[j] = dx * a[j];
}

void series_coefficients(const BasisFamily& basis, std::uint64_t seed, std::uint32_t stream, int n,
                         std::span<double> coeff) {
  GaussianStream g(seed, stream, StreamTag::series_noise);
  g.fill_normals(static_cast<std::uint32_t>(n), 0, coeff.data(), coeff.size());
  const double sdt = std::sqrt(basis.domain.dt());
  for (double& c : coeff) c *= sdt;
}

}  // namespace

SeriesNoiseStream::SeriesNoiseStream(GridSpec grid, BasisFamily basis, std::uint64_t seed, std::uint32_t stream)
    : grid_(grid), basis_(std::move(basis)), seed_(seed), stream_(stream) {
  grid_.validate();
  basis_.domain = grid_;
  basis_.validate();
}

void SeriesNoiseStream::row(int n, std::span<double> out) const {
  std::vector<double> coeff(basis_.n_modes);
  series_coefficients(basis_, seed_, stream_, n, coeff);
  if (basis_.kind == BasisKind::trigonometric)
    synthesize_trig(basis_, coeff, out);
  else
    synthesize_haar(basis_, coeff, out);
}

void ZeroNoise::row(int, std::span<double> out) const { std::fill(out.begin(), out.end(), 0.0); }

// ---------------------------------------------------------------------------
// Materialized generators

NoiseField generate_rectangle_noise(const GridSpec& grid, std::uint64_t seed, std::uint32_t stream) {
  grid.validate();
  RectangleNoiseStream src(grid, seed, stream);
  std::vector<double> inc(static_cast<std::size_t>(grid.n_t) * grid.n_x);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < grid.n_t; ++n)
    src.row(n, std::span<double>(inc).subspan(static_cast<std::size_t>(n) * grid.n_x, grid.n_x));
  return NoiseField(grid, std::move(inc), seed, NoiseConstruction::rectangle_increment, grid.n_x);
}

NoiseField generate_rectangle_noise_serial(const GridSpec& grid, std::uint64_t seed, std::uint32_t stream) {
  grid.validate();
  GaussianStream g(seed, stream, StreamTag::rectangle_noise);
  const double scale = std::sqrt(grid.dt() * grid.dx());
  std::vector<double> inc(static_cast<std::size_t>(grid.n_t) * grid.n_x);
  for (int n = 0; n < grid.n_t; ++n)
    for (int j = 0; j < grid.n_x; ++j)
      inc[static_cast<std::size_t>(n) * grid.n_x + j] =
          scale * g.normal(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(j));
  return NoiseField(grid, std::move(inc), seed, NoiseConstruction::rectangle_increment, grid.n_x);
}

NoiseField generate_series_noise(const GridSpec& grid, const BasisFamily& basis, std::uint64_t seed,
                                 std::uint32_t stream) {
  SeriesNoiseStream src(grid, basis, seed, stream);
  std::vector<double> inc(static_cast<std::size_t>(grid.n_t) * grid.n_x);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < grid.n_t; ++n)
    src.row(n, std::span<double>(inc).subspan(static_cast<std::size_t>(n) * grid.n_x, grid.n_x));
  return NoiseField(grid, std::move(inc), seed, NoiseConstruction::series_truncation, basis.n_modes);
}

NoiseField generate_series_noise_direct(const GridSpec& grid, const BasisFamily& basis, std::uint64_t seed,
                                        std::uint32_t stream) {
  grid.validate();
  BasisFamily b = basis;
  b.domain = grid;
  b.validate();
  const double dx = grid.dx();
  std::vector<double> inc(static_cast<std::size_t>(grid.n_t) * grid.n_x, 0.0);
  std::vector<double> coeff(b.n_modes);
  for (int n = 0; n < grid.n_t; ++n) {
    series_coefficients(b, seed, stream, n, coeff);
    for (int j = 0; j < grid.n_x; ++j) {
      double s = 0.0;
      for (int k = 0; k < b.n_modes; ++k) s += b.eval(k, j) * coeff[k];
      inc[static_cast<std::size_t>(n) * grid.n_x + j] = dx * s;
    }
  }
  return NoiseField(grid, std::move(inc), seed, NoiseConstruction::series_truncation, b.n_modes);
}

// ---------------------------------------------------------------------------
// Covariance validation

double Rect::area() const { return std::max(0.0, t1 - t0) * std::max(0.0, x1 - x0); }

Rect Rect::intersect(const Rect& o) const {
  Rect r{std::max(t0, o.t0), std::min(t1, o.t1), std::max(x0, o.x0), std::min(x1, o.x1)};
  if (r.t1 < r.t0) r.t1 = r.t0;
  if (r.x1 < r.x0) r.x1 = r.x0;
  return r;
}

double CovarianceReport::max_abs_z() const {
  double m = 0.0;
  for (const auto& p : probes) m = std::max(m, std::abs(p.z));
  return m;
}

namespace {

struct CellRange {
  int n0, n1, j0, j1;
};

int aligned_index(double value, double origin, double step, int limit, const char* what) {
  const double f = (value - origin) / step;
  const double r = std::round(f);
  if (std::abs(f - r) > 1e-6 || r < 0 || r > limit)
    throw ArgumentError(std::string("validate_covariance: rectangle ") + what + " edge not on the grid");
  return static_cast<int>(r);
}

CellRange to_cells(const Rect& r, const GridSpec& g) {
  CellRange c{aligned_index(r.t0, 0.0, g.dt(), g.n_t, "time"), aligned_index(r.t1, 0.0, g.dt(), g.n_t, "time"),
              aligned_index(r.x0, g.x_min, g.dx(), g.n_x, "space"),
              aligned_index(r.x1, g.x_min, g.dx(), g.n_x, "space")};
  if (c.n1 < c.n0 || c.j1 < c.j0) throw ArgumentError("validate_covariance: inverted rectangle");
  return c;
}

}  // namespace

CovarianceReport validate_covariance(std::size_t n_fields, const NoiseFactory& make,
                                     std::span<const RectPair> pairs) {
  if (n_fields == 0) throw ArgumentError("validate_covariance: empty ensemble");
  if (pairs.empty()) throw ArgumentError("validate_covariance: no rectangle pairs");
  const GridSpec grid = make(0)->grid();

  std::vector<CellRange> cells;
  for (const auto& p : pairs) {
    cells.push_back(to_cells(p.a, grid));
    cells.push_back(to_cells(p.b, grid));
  }
  int n_lo = grid.n_t, n_hi = 0, j_lo = grid.n_x, j_hi = 0;
  for (const auto& c : cells) {
    n_lo = std::min(n_lo, c.n0);
    n_hi = std::max(n_hi, c.n1);
    j_lo = std::min(j_lo, c.j0);
    j_hi = std::max(j_hi, c.j1);
  }

  // sums[i * cells + r] = W_i(rectangle r)
  const std::size_t n_rect = cells.size();
  std::vector<double> sums(n_fields * n_rect, 0.0);
  const long long total = static_cast<long long>(n_fields);
  bool mismatch = false;
#pragma omp parallel
  {
    std::vector<double> row(std::max(0, j_hi - j_lo));
#pragma omp for schedule(dynamic, 16)
    for (long long i = 0; i < total; ++i) {
      auto src = make(static_cast<std::size_t>(i));
      if (!(src->grid() == grid)) {
#pragma omp atomic write
        mismatch = true;
        continue;
      }
      double* s = &sums[static_cast<std::size_t>(i) * n_rect];
      for (int n = n_lo; n < n_hi; ++n) {
        src->row_range(n, j_lo, row);
        for (std::size_t r = 0; r < n_rect; ++r) {
          const auto& c = cells[r];
          if (n < c.n0 || n >= c.n1) continue;
          double acc = 0.0;
          for (int j = c.j0; j < c.j1; ++j) acc += row[j - j_lo];
          s[r] += acc;
        }
      }
    }
  }

  if (mismatch) throw ArgumentError("validate_covariance: fields on different grids");

  CovarianceReport rep;
  rep.n_fields = n_fields;
  const double N = static_cast<double>(n_fields);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_fields; ++i) mean += sums[i * n_rect + 2 * p] * sums[i * n_rect + 2 * p + 1];
    mean /= N;
    double var = 0.0;
    for (std::size_t i = 0; i < n_fields; ++i) {
      const double d = sums[i * n_rect + 2 * p] * sums[i * n_rect + 2 * p + 1] - mean;
      var += d * d;
    }
    var = n_fields > 1 ? var / (N - 1.0) : 0.0;
    CovarianceProbe probe;
    probe.pair = pairs[p];
    probe.empirical = mean;
    probe.target = pairs[p].a.intersect(pairs[p].b).area();
    probe.stderr_ = std::sqrt(var / N);
    const double diff = probe.empirical - probe.target;
    probe.z = probe.stderr_ > 0 ? diff / probe.stderr_ : (diff == 0 ? 0.0 : INFINITY);
    rep.probes.push_back(probe);
  }
  return rep;
}

CovarianceReport validate_covariance(std::span<const NoiseField> fields, std::span<const RectPair> pairs) {
  if (fields.empty()) throw ArgumentError("validate_covariance: empty ensemble");
  NoiseFactory make = [&](std::size_t i) -> std::unique_ptr<NoiseSource> {
    return std::make_unique<NoiseField>(fields[i]);
  };
  return validate_covariance(fields.size(), make, pairs);
}

std::vector<double> covariance_discrepancy(const CovarianceReport& lhs, const CovarianceReport& rhs) {
  if (lhs.probes.size() != rhs.probes.size()) throw ArgumentError("covariance_discrepancy: probe sets differ");
  std::vector<double> z;
  for (std::size_t i = 0; i < lhs.probes.size(); ++i) {
    const auto& a = lhs.probes[i];
    const auto& b = rhs.probes[i];
    const double se = std::hypot(a.stderr_, b.stderr_);
    const double d = a.empirical - b.empirical;
    z.push_back(se > 0 ? d / se : (d == 0 ? 0.0 : INFINITY));
  }
  return z;
}

MomentSummary sample_moments(std::span<const double> values) {
  MomentSummary m;
  m.count = values.size();
  if (m.count < 4) throw ArgumentError("sample_moments: need at least 4 values");
  const double N = static_cast<double>(m.count);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= N;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= N;
  m4 /= N;
  m.mean = mean;
  m.variance = m2 * N / (N - 1.0);
  m.kurtosis = m4 / (m2 * m2);
  // Large-sample standard errors under normality.
  m.variance_stderr = m.variance * std::sqrt(2.0 / (N - 1.0));
  m.kurtosis_stderr = std::sqrt(24.0 / N);
  return m;
}

// ---------------------------------------------------------------------------
// Dumps

void write_noise_dump(const std::filesystem::path& path, const NoiseField& field) {
  io::BinaryWriter w(path);
  w.magic("STWN");
  w.u32(1);
  w.u64(static_cast<std::uint64_t>(field.grid().n_t));
  w.u64(static_cast<std::uint64_t>(field.grid().n_x));
  w.f64(field.grid().dx());
  w.f64(field.grid().dt());
  w.f64s(field.increments());
  w.finish();
}

NoiseField read_noise_dump(const std::filesystem::path& path) {
  io::BinaryReader r(path);
  r.expect_magic("STWN");
  const auto version = r.u32();
  if (version != 1) throw ConfigError("unsupported STWN version " + std::to_string(version));
  const auto n_t = r.u64();
  const auto n_x = r.u64();
  const double dx = r.f64();
  const double dt = r.f64();
  GridSpec g{0.0, dx * static_cast<double>(n_x), static_cast<int>(n_x), dt * static_cast<double>(n_t),
             static_cast<int>(n_t), Boundary::periodic};
  std::vector<double> inc(n_t * n_x);
  r.f64s(inc);
  return NoiseField(g, std::move(inc), 0, NoiseConstruction::rectangle_increment, static_cast<int>(n_x));
}

}  // namespace sgb
