#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace sgb {

/// Real-to-complex / complex-to-real transform of fixed length backed by FFTW.
///
/// Unnormalized in both directions, FFTW sign convention:
///   forward:  X_k = sum_j x_j e^{-2 pi i jk/n},  k = 0..n/2
///   inverse:  x_j = sum_k X_k e^{+2 pi i jk/n}   (Hermitian extension)
/// Instances own their buffers and are not shareable across threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Per-thread cached transform of length n.
RealFft& thread_local_fft(std::size_t n);

}  // namespace sgb
