#pragma once

// Reference solutions that do not go through the library's own code paths.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace oracle {

/// R_gamma(x) = 2^{(1-gamma)/2} / (sqrt(pi) Gamma(gamma/2)) |x|^{(gamma-1)/2} K_{(1-gamma)/2}(|x|).
inline double bessel_kernel(double gamma, double x) {
  const double a = std::abs(x);
  const double nu = std::abs(1.0 - gamma) / 2.0;
  return std::pow(2.0, (1.0 - gamma) / 2.0) / (std::sqrt(std::numbers::pi) * std::tgamma(gamma / 2.0)) *
         std::pow(a, (gamma - 1.0) / 2.0) * std::cyl_bessel_k(nu, a);
}

/// Heat equation u_t = a u_xx on the line from a Gaussian bump of amplitude A and
/// standard deviation w centred at c.
inline double heat_gaussian(double A, double c, double w, double a, double t, double x) {
  const double s2 = w * w + 2.0 * a * t;
  const double d = x - c;
  return A * std::sqrt(w * w / s2) * std::exp(-0.5 * d * d / s2);
}

/// Exact fractional Gaussian noise by circulant embedding (Davies and Harte):
/// one FFT of length 2n yields two independent series of length n with
/// autocovariance (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
class DaviesHarte {
 public:
  DaviesHarte(std::size_t n, double hurst) : n_(n), m_(2 * n), sqrt_eig_(2 * n) {
    auto gam = [hurst](double k) {
      const double h2 = 2.0 * hurst;
      return 0.5 * (std::pow(std::abs(k + 1), h2) - 2.0 * std::pow(std::abs(k), h2) + std::pow(std::abs(k - 1), h2));
    };
    buf_ = fftw_alloc_complex(m_);
    plan_ = fftw_plan_dft_1d(static_cast<int>(m_), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    for (std::size_t j = 0; j < m_; ++j) {
      const double k = j <= n_ ? static_cast<double>(j) : static_cast<double>(m_ - j);
      buf_[j][0] = gam(k);
      buf_[j][1] = 0.0;
    }
    fftw_execute(plan_);
    for (std::size_t j = 0; j < m_; ++j) {
      if (buf_[j][0] < -1e-9) throw std::runtime_error("circulant embedding is not nonnegative definite");
      sqrt_eig_[j] = std::sqrt(std::max(buf_[j][0], 0.0) / static_cast<double>(m_));
    }
  }
  ~DaviesHarte() {
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  DaviesHarte(const DaviesHarte&) = delete;
  DaviesHarte& operator=(const DaviesHarte&) = delete;

  /// Two independent fGn series of length n.
  template <class Rng>
  std::pair<std::vector<double>, std::vector<double>> sample(Rng& rng) {
    std::normal_distribution<double> z;
    for (std::size_t j = 0; j < m_; ++j) {
      buf_[j][0] = sqrt_eig_[j] * z(rng);
      buf_[j][1] = sqrt_eig_[j] * z(rng);
    }
    fftw_execute(plan_);
    std::vector<double> a(n_), b(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      a[j] = buf_[j][0];
      b[j] = buf_[j][1];
    }
    return {a, b};
  }

 private:
  std::size_t n_, m_;
  std::vector<double> sqrt_eig_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

/// Partial sums starting at 0: fBm from fGn.
inline std::vector<double> cumulative(const std::vector<double>& steps) {
  std::vector<double> out(steps.size() + 1, 0.0);
  for (std::size_t i = 0; i < steps.size(); ++i) out[i + 1] = out[i] + steps[i];
  return out;
}

/// Brownian path on n + 1 nodes with spacing dx.
template <class Rng>
std::vector<double> brownian(std::size_t n, double dx, Rng& rng) {
  std::normal_distribution<double> z(0.0, std::sqrt(dx));
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i + 1] = out[i] + z(rng);
  return out;
}

}  // namespace oracle
