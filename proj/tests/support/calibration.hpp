#pragma once

// Known-exponent synthetic fields pushed through the structure-function estimator.

#include <cstdint>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sgb/estimator.hpp"

namespace calib {

/// Settings for one-row fields of n + 1 samples on unit spacing.
inline sgb::EstimatorSettings series_settings(std::size_t n, std::vector<int> lags, std::uint64_t seed) {
  sgb::EstimatorSettings s;
  s.direction = sgb::Direction::space;
  s.q = 2.0;
  s.lags = std::move(lags);
  s.burn_in = 0.5;
  s.window = {0.5, 1.5, 0.5, static_cast<double>(n) + 0.5};
  s.bootstrap_seed = seed;
  return s;
}

inline sgb::PathStructure series_structure(const std::vector<double>& u, const sgb::EstimatorSettings& s) {
  sgb::FieldSamples f;
  f.values = u;
  f.row_size = u.size();
  f.steps = {1};
  return sgb::path_structure(f, s);
}

/// Estimates H from `paths` fBm samples of length n; the oracle draws from mt19937_64(seed).
inline sgb::EstimatorReport fbm_estimate(double hurst, std::size_t n, std::size_t paths, std::uint64_t seed) {
  oracle::DaviesHarte dh(n, hurst);
  std::mt19937_64 rng(seed);
  const auto s = series_settings(n, sgb::dyadic_lags(1, 256), seed);
  std::vector<sgb::PathStructure> acc;
  acc.reserve(paths);
  while (acc.size() < paths) {
    auto [a, b] = dh.sample(rng);
    acc.push_back(series_structure(oracle::cumulative(a), s));
    if (acc.size() < paths) acc.push_back(series_structure(oracle::cumulative(b), s));
  }
  return sgb::structure_from_accumulators(acc, s, 1.0);
}

}  // namespace calib
