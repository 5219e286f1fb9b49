#include "sgb/kernelspace.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "sgb/error.hpp"
#include "sgb/fft.hpp"

namespace sgb {

BesselKernelTable::BesselKernelTable(double gamma, KernelGridSpec aux) : gamma_(gamma), aux_(aux) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("Bessel kernel: gamma must be positive");
  if (aux.n < 16 || aux.n % 2 != 0 || !(aux.half_width > 0.0))
    throw ArgumentError("Bessel kernel: auxiliary grid must have an even number (>= 16) of points");

  const std::size_t n = aux.n;
  const double L = 2.0 * aux.half_width;
  const double h = aux.spacing();
  RealFft fft(n);
  std::vector<std::complex<double>> spec(fft.spectrum_size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double xi = 2.0 * std::numbers::pi * static_cast<double>(k) / L;
    spec[k] = std::pow(1.0 + xi * xi, -0.5 * gamma) / L;
  }
  std::vector<double> full(n);
  fft.inverse(spec, full);

  half_.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n / 2 + 1));
  double s = 0.0, s2 = 0.0;
  for (double v : full) {
    s += v;
    s2 += v * v;
  }
  integral_ = s * h;
  l2_ = s2 * h;
}

double BesselKernelTable::resolution_limit() const { return gamma_ <= 1.0 ? 4.0 * aux_.spacing() : 0.0; }

double BesselKernelTable::value(double x) const {
  const double ax = std::abs(x);
  if (ax < resolution_limit())
    throw SingularityError("Bessel kernel: |x| = " + std::to_string(ax) +
                           " is below the auxiliary resolution for gamma <= 1");
  const double f = ax / aux_.spacing();
  const auto i = static_cast<std::size_t>(f);
  if (i + 1 >= half_.size()) throw ArgumentError("Bessel kernel: |x| outside the auxiliary grid");
  const double w = f - static_cast<double>(i);
  return (1.0 - w) * half_[i] + w * half_[i + 1];
}

double BesselKernelTable::integral() const { return integral_; }
double BesselKernelTable::l2_squared() const { return l2_; }

BesselKernel bessel_kernel_eval(double gamma, std::span<const double> xs, KernelGridSpec aux) {
  BesselKernelTable table(gamma, aux);
  BesselKernel k;
  k.gamma = gamma;
  k.positive = true;
  for (double x : xs) {
    const double v = table.value(x);
    k.samples.push_back({x, v});
    if (!(v > 0.0)) k.positive = false;
    if (std::abs(x) >= 2.0) k.tail_constant = std::max(k.tail_constant, v * std::exp(std::abs(x) / 2.0));
  }
  return k;
}

double loglog_slope(const BesselKernel& kernel) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (const auto& s : kernel.samples) {
    if (!(s.value > 0.0) || s.x == 0.0) throw ArgumentError("loglog_slope: non-positive sample");
    const double lx = std::log(std::abs(s.x));
    const double ly = std::log(s.value);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1;
  }
  if (n < 2) throw ArgumentError("loglog_slope: need at least two samples");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RefinementStudy kernel_l2_refinement(double gamma, std::span<const std::size_t> sizes, double half_width) {
  if (sizes.size() < 4) throw ArgumentError("kernel_l2_refinement: need at least four refinement levels");
  RefinementStudy st;
  st.gamma = gamma;
  for (std::size_t n : sizes) {
    st.sizes.push_back(n);
    st.values.push_back(BesselKernelTable(gamma, {n, half_width}).l2_squared());
  }
  for (std::size_t i = 0; i + 1 < st.values.size(); ++i) st.increments.push_back(st.values[i + 1] - st.values[i]);
  for (std::size_t i = 0; i + 1 < st.increments.size(); ++i)
    st.ratios.push_back(st.increments[i + 1] / st.increments[i]);
  const std::size_t r = st.ratios.size();
  st.converged = st.ratios[r - 1] <= 0.8 && st.ratios[r - 2] <= 0.8;
  return st;
}

// ---------------------------------------------------------------------------

std::vector<double> bessel_potential(std::span<const double> u, const GridSpec& grid, double gamma) {
  if (grid.boundary != Boundary::periodic)
    throw UnsupportedError("Bessel potential: spectral multipliers require a periodic grid");
  if (u.size() != static_cast<std::size_t>(grid.n_x)) throw ArgumentError("Bessel potential: size mismatch");
  if (gamma == 0.0) return {u.begin(), u.end()};
  const std::size_t n = u.size();
  auto& fft = thread_local_fft(n);
  std::vector<std::complex<double>> spec(fft.spectrum_size());
  fft.forward(u, spec);
  const double L = grid.length();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double xi = 2.0 * std::numbers::pi * static_cast<double>(k) / L;
    spec[k] *= std::pow(1.0 + xi * xi, 0.5 * gamma) / static_cast<double>(n);
  }
  std::vector<double> out(n);
  fft.inverse(spec, out);
  return out;
}

double lp_norm(std::span<const double> u, double dx, double p) {
  if (!(p >= 1.0)) throw ArgumentError("lp_norm: p must be at least 1");
  double s = 0.0;
  if (p == 2.0) {
    for (double v : u) s += v * v;
    return std::sqrt(s * dx);
  }
  if (p == 1.0) {
    for (double v : u) s += std::abs(v);
    return s * dx;
  }
  for (double v : u) s += std::pow(std::abs(v), p);
  return std::pow(s * dx, 1.0 / p);
}

SobolevNorm fractional_norm(std::span<const double> u, const GridSpec& grid, double gamma, double p) {
  if (!(p >= 1.0)) throw ArgumentError("fractional_norm: p must be at least 1");
  const auto v = bessel_potential(u, grid, gamma);
  return {gamma, p, lp_norm(v, grid.dx(), p)};
}

namespace {

MultiplicativeReport evaluate_interpolation(std::span<const double> u, const GridSpec& grid,
                                            std::pair<double, double> gammas, std::pair<double, double> ps,
                                            double eps, double gamma, double p) {
  MultiplicativeReport r;
  r.gamma = gamma;
  r.p = p;
  r.lhs = fractional_norm(u, grid, gamma, p).value;
  const double n0 = fractional_norm(u, grid, gammas.first, ps.first).value;
  const double n1 = fractional_norm(u, grid, gammas.second, ps.second).value;
  r.rhs = std::pow(n0, eps) * std::pow(n1, 1.0 - eps);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-8);
  return r;
}

void check_weights(std::pair<double, double> ps, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ArgumentError("multiplicative inequality: eps must lie in [0,1]");
  if (!(ps.first >= 1.0 && ps.second >= 1.0))
    throw ArgumentError("multiplicative inequality: p0, p1 must be at least 1");
}

}  // namespace

MultiplicativeReport check_multiplicative_inequality(std::span<const double> u, const GridSpec& grid,
                                                     std::pair<double, double> gammas,
                                                     std::pair<double, double> ps, double eps) {
  check_weights(ps, eps);
  const double inv_p = eps / ps.first + (1.0 - eps) / ps.second;
  const double p = 1.0 / inv_p;
  const double gamma = eps * gammas.first + (1.0 - eps) * gammas.second;
  if (!(p >= 1.0)) throw ArgumentError("multiplicative inequality: interpolated p below 1");
  return evaluate_interpolation(u, grid, gammas, ps, eps, gamma, p);
}

MultiplicativeReport check_multiplicative_inequality(std::span<const double> u, const GridSpec& grid,
                                                     std::pair<double, double> gammas,
                                                     std::pair<double, double> ps, double eps, double gamma,
                                                     double p) {
  check_weights(ps, eps);
  if (!(p >= 1.0)) throw ArgumentError("multiplicative inequality: p must be at least 1");
  const double inv_p = eps / ps.first + (1.0 - eps) / ps.second;
  if (std::abs(1.0 / p - inv_p) > 1e-12 * std::max(1.0, inv_p))
    throw ArgumentError("multiplicative inequality: 1/p != eps/p0 + (1-eps)/p1");
  const double g = eps * gammas.first + (1.0 - eps) * gammas.second;
  if (std::abs(gamma - g) > 1e-12 * std::max(1.0, std::abs(g)))
    throw ArgumentError("multiplicative inequality: gamma != eps gamma0 + (1-eps) gamma1");
  return evaluate_interpolation(u, grid, gammas, ps, eps, gamma, p);
}

double holder_seminorm(std::span<const double> u, double dx, double order, LagWindow window) {
  if (!(order > 0.0 && order < 1.0)) throw ArgumentError("holder_seminorm: order must lie in (0,1)");
  if (!(dx > 0.0)) throw ArgumentError("holder_seminorm: dx must be positive");
  const int n = static_cast<int>(u.size());
  const int max_lag = window.max_lag > 0 ? window.max_lag : std::max(1, n / 8);
  const int min_lag = std::max(1, window.min_lag);
  double best = 0.0;
  for (int lag = min_lag; lag <= max_lag && lag < n; ++lag) {
    const double scale = std::pow(lag * dx, order);
    double m = 0.0;
    for (int j = 0; j + lag < n; ++j) m = std::max(m, std::abs(u[j + lag] - u[j]));
    best = std::max(best, m / scale);
  }
  return best;
}

}  // namespace sgb
