#include "sgb/rng.hpp"

#include <cmath>
#include <numbers>

namespace sgb {
namespace philox {

namespace {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}
}  // namespace

Counter block(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

}  // namespace philox

namespace {
// 53-bit uniform in (0,1).
inline double open_uniform(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}
}  // namespace

std::pair<double, double> GaussianStream::normal_pair(std::uint32_t row, std::uint32_t pair) const {
  const auto r = philox::block({pair, row, stream_, tag_}, key_);
  const double u1 = open_uniform(r[0], r[1]);
  const double u2 = open_uniform(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double GaussianStream::uniform(std::uint32_t row, std::uint32_t col) const {
  const auto r = philox::block({col >> 1, row, stream_, tag_ ^ 0x80000000u}, key_);
  return (col & 1u) ? open_uniform(r[2], r[3]) - 0x1.0p-54 : open_uniform(r[0], r[1]) - 0x1.0p-54;
}

void GaussianStream::fill_normals(std::uint32_t row, std::uint32_t col0, double* out,
                                  std::size_t count) const {
  std::size_t i = 0;
  std::uint32_t col = col0;
  if ((col & 1u) && i < count) {
    out[i++] = normal_pair(row, col >> 1).second;
    ++col;
  }
  for (; i + 1 < count; i += 2, col += 2) {
    auto [a, b] = normal_pair(row, col >> 1);
    out[i] = a;
    out[i + 1] = b;
  }
  if (i < count) out[i] = normal_pair(row, col >> 1).first;
}

}  // namespace sgb
