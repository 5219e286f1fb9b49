#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sgb/error.hpp"
#include "sgb/estimator.hpp"
#include "support/calibration.hpp"
#include "support/oracles.hpp"

namespace {

using Paths = std::vector<sgb::PathStructure>;

template <class Make>
Paths many(std::size_t n_paths, const sgb::EstimatorSettings& s, Make make) {
  Paths acc;
  for (std::size_t p = 0; p < n_paths; ++p) acc.push_back(calib::series_structure(make(p), s));
  return acc;
}

sgb::EstimatorReport report(double hat, double lo, double hi) {
  sgb::EstimatorReport r;
  r.exponent_hat = hat;
  r.ci_low = lo;
  r.ci_high = hi;
  return r;
}

sgb::ExponentInput cell(double lambda, double lambda0, double space, double time) {
  sgb::ExponentInput in;
  in.spec.lambda = lambda;
  in.spec.lambda0 = lambda0;
  in.grid = sgb::GridSpec::with_parabolic_dt(-8, 8, 64, 1, sgb::Boundary::periodic);
  in.space = report(space, space - 0.02, space + 0.02);
  in.time = report(time, time - 0.02, time + 0.02);
  return in;
}

sgb::EnsembleSummary exceedance(std::vector<double> levels, std::vector<std::size_t> counts, std::size_t n) {
  sgb::EnsembleSummary s;
  s.n_paths = n;
  for (std::size_t i = 0; i < levels.size(); ++i)
    s.per_level.push_back({levels[i], counts[i], double(counts[i]) / double(n), 0.0});
  return s;
}

}  // namespace

TEST_CASE("estimator examples with known exponents") {
  const std::size_t n = 4096;
  const auto s = calib::series_settings(n, sgb::dyadic_lags(1, 64), 5);
  std::mt19937_64 rng(2024);

  SUBCASE("Brownian motion has exponent 1/2") {
    const auto r = sgb::structure_from_accumulators(many(50, s, [&](std::size_t) { return oracle::brownian(n, 1.0, rng); }), s, 1.0);
    CHECK(r.exponent_hat == doctest::Approx(0.5).epsilon(0.06));
    CHECK(r.ci_low <= r.exponent_hat);
    CHECK(r.exponent_hat <= r.ci_high);
    CHECK(r.oscillation_exponent == doctest::Approx(0.5).epsilon(0.3));
  }
  SUBCASE("a linear profile has exponent 1") {
    const auto r = sgb::structure_from_accumulators(many(30, s, [&](std::size_t p) {
      std::vector<double> u(n + 1);
      for (std::size_t j = 0; j <= n; ++j) u[j] = (1.0 + p) * j;
      return u;
    }), s, 1.0);
    CHECK(r.exponent_hat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.ci_low == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.ci_high == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("white noise has exponent 0") {
    std::normal_distribution<double> z;
    const auto r = sgb::structure_from_accumulators(many(30, s, [&](std::size_t) {
      std::vector<double> u(n + 1);
      for (double& v : u) v = z(rng);
      return u;
    }), s, 1.0);
    CHECK(std::abs(r.exponent_hat) < 0.02);
  }
  SUBCASE("rescaling the field leaves the exponent unchanged") {
    std::vector<std::vector<double>> fields;
    for (int p = 0; p < 30; ++p) fields.push_back(oracle::brownian(n, 1.0, rng));
    const auto a = sgb::structure_from_accumulators(many(30, s, [&](std::size_t p) { return fields[p]; }), s, 1.0);
    const auto b = sgb::structure_from_accumulators(many(30, s, [&](std::size_t p) {
      auto u = fields[p];
      for (double& v : u) v *= 7.3;
      return u;
    }), s, 1.0);
    CHECK(std::abs(a.exponent_hat - b.exponent_hat) < 1e-12);
    CHECK(std::abs(a.ci_low - b.ci_low) < 1e-12);
    CHECK(std::abs(a.ci_high - b.ci_high) < 1e-12);
  }
}

TEST_CASE("time increments use recorded rows inside the window") {
  const int steps = 2048;
  std::mt19937_64 rng(8);
  sgb::EstimatorSettings s;
  s.direction = sgb::Direction::time;
  s.lags = sgb::dyadic_lags(1, 32);
  s.burn_in = 0.5;
  s.window = {0.5, double(steps), 0.5, 2.5};
  Paths acc;
  std::vector<std::vector<double>> store;
  for (int p = 0; p < 40; ++p) {
    const auto b = oracle::brownian(steps, 1.0, rng);
    std::vector<double> field;
    for (double v : b) field.insert(field.end(), {v, v, v, v});
    store.push_back(std::move(field));
    sgb::FieldSamples f;
    f.values = store.back();
    f.row_size = 4;
    for (int k = 0; k <= steps; ++k) f.steps.push_back(k);
    acc.push_back(sgb::path_structure(f, s));
    CHECK(acc.back().counts[0] == std::size_t(2 * (steps - 1)));
  }
  const auto r = sgb::structure_from_accumulators(acc, s, 1.0);
  CHECK(r.exponent_hat == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("estimator preconditions") {
  auto s = calib::series_settings(100, {1, 2, 4}, 0);
  CHECK_NOTHROW(sgb::check_estimator_settings(s, 0.0, 101.0, 2.0));
  CHECK_THROWS_AS(sgb::check_estimator_settings(s, 0.5, 101.0, 2.0), sgb::ArgumentError);
  CHECK_THROWS_AS(sgb::check_estimator_settings(s, 0.0, 100.5, 2.0), sgb::ArgumentError);
  CHECK_THROWS_AS(sgb::check_estimator_settings(s, 0.0, 101.0, 1.0), sgb::ArgumentError);
  auto t = s;
  t.lags = {1, 2};
  CHECK_THROWS_AS(sgb::check_estimator_settings(t, 0.0, 101.0, 2.0), sgb::ArgumentError);
  t = s;
  t.burn_in = 0.0;
  CHECK_THROWS_AS(sgb::check_estimator_settings(t, 0.0, 101.0, 2.0), sgb::ArgumentError);
  t = s;
  t.burn_in = 1.0;
  CHECK_THROWS_AS(sgb::check_estimator_settings(t, 0.0, 101.0, 2.0), sgb::ArgumentError);

  std::mt19937_64 rng(1);
  const auto few = many(29, s, [&](std::size_t) { return oracle::brownian(100, 1.0, rng); });
  CHECK_THROWS_AS(sgb::structure_from_accumulators(few, s, 1.0), sgb::ArgumentError);
  auto wide = s;
  wide.lags = {1, 2, 400};
  const auto short_paths = many(30, wide, [&](std::size_t) { return oracle::brownian(100, 1.0, rng); });
  CHECK_THROWS_AS(sgb::structure_from_accumulators(short_paths, wide, 1.0), sgb::ArgumentError);
}

TEST_CASE("helpers") {
  CHECK(sgb::dyadic_lags(1, 20) == std::vector<int>{1, 2, 4, 8, 16});
  CHECK(sgb::dyadic_lags(3, 24) == std::vector<int>{3, 6, 12, 24});
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  CHECK(sgb::ols_slope(x, y) == doctest::Approx(2.0));
  CHECK_THROWS_AS(sgb::ols_slope(std::vector<double>{1, 1}, std::vector<double>{0, 1}), sgb::ArgumentError);

  std::vector<sgb::EstimatorReport> reps(1);
  reps[0].lags = {1, 2, 4};
  reps[0].lag_unit = 0.5;
  reps[0].structure_values = {1, 2, 3};
  const auto path = std::filesystem::temp_directory_path() / "sgb_structure.csv";
  sgb::write_structure_csv(path, reps);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "lag,Sq,direction,q");
  CHECK(first.rfind("0.5,1,space,", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("bootstrap intervals cover the true Hurst index") {
  int covered = 0;
  const int reps = 60;
  for (int r = 0; r < reps; ++r) {
    auto s = calib::series_settings(4096, sgb::dyadic_lags(1, 64), 100 + r);
    s.bootstrap_replicates = 200;
    oracle::DaviesHarte dh(4096, 0.5);
    std::mt19937_64 rng(1000 + r);
    Paths acc;
    while (acc.size() < 30) {
      auto [a, b] = dh.sample(rng);
      acc.push_back(calib::series_structure(oracle::cumulative(a), s));
      acc.push_back(calib::series_structure(oracle::cumulative(b), s));
    }
    const auto rep = sgb::structure_from_accumulators(acc, s, 1.0);
    covered += rep.ci_low <= 0.5 && 0.5 <= rep.ci_high;
  }
  MESSAGE("coverage " << covered << " / " << reps);
  CHECK(covered >= int(0.85 * reps));
}

TEST_CASE("fBm calibration recovers the Hurst index") {
  for (double H : {0.25, 0.75}) {
    const auto r = calib::fbm_estimate(H, 1 << 13, 40, 9);
    CAPTURE(H);
    CHECK(std::abs(r.exponent_hat - H) <= 0.05);
  }
}

TEST_CASE("exponent verification") {
  CHECK(sgb::case2_space_target(0.25, 0.0) == doctest::Approx(0.5));
  CHECK(sgb::case2_space_target(0.9, 0.0) == doctest::Approx(0.1));
  CHECK(sgb::case2_space_target(0.5, 0.4) == doctest::Approx(0.1));
  CHECK(sgb::case2_space_target(0.75, 0.1) == doctest::Approx(0.25));

  const std::vector<sgb::ExponentInput> good{cell(0.25, 0, 0.49, 0.26), cell(1.0, 0, 0.51, 0.24)};
  CHECK(sgb::verify_case1_exponents(good).pass);
  auto off = good;
  off[1] = cell(1.0, 0, 0.42, 0.24);
  const auto r = sgb::verify_case1_exponents(off);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.space_cis_overlap);
  CHECK(r.max_pairwise_space_diff == doctest::Approx(0.07));
  off[1].grid.n_x = 128;
  CHECK_THROWS_AS(sgb::verify_case1_exponents(off), sgb::ArgumentError);

  // Case 2 is one-sided: rougher than the target fails, smoother passes.
  CHECK(sgb::verify_case2_exponents(std::vector{cell(0.9, 0.0, 0.48, 0.24)}).pass);
  CHECK_FALSE(sgb::verify_case2_exponents(std::vector{cell(0.9, 0.0, 0.02, 0.01)}).pass);

  auto message = [](sgb::ExponentInput in) -> std::string {
    try {
      sgb::verify_case2_exponents(std::vector{in});
    } catch (const sgb::ArgumentError& e) {
      return e.what();
    }
    return {};
  };
  CHECK(message(cell(1.0, 0.0, 0.5, 0.25)).find("λ∈(0,1)") != std::string::npos);
  CHECK(message(cell(0.5, 0.5, 0.5, 0.25)).find("λ_0∈[0,1/2)") != std::string::npos);
}

TEST_CASE("mass bounds") {
  sgb::ProblemSpec spec;
  spec.regime = sgb::Regime::case2_superlinear;
  spec.lambda = 0.5;
  const auto g = sgb::GridSpec::with_parabolic_dt(-8, 8, 64, 1, sgb::Boundary::periodic);
  sgb::EnsembleSummary s;
  s.sqrt_initial_mass = {1.0, 0.0};
  s.sup_sqrt_mass = {20.0, 0.5};
  auto r = sgb::mass_bound_check(s, spec, g);
  CHECK(r.bound == doctest::Approx(3 * std::exp(2.0)));
  CHECK(r.pass);
  s.sup_sqrt_mass.stderr_ = 1.0;
  CHECK_FALSE(sgb::mass_bound_check(s, spec, g).pass);

  spec.regime = sgb::Regime::case1_bounded_lipschitz;
  spec.K = 0.5;
  s.initial_mass = {2.0, 0.0};
  s.integrated_mass = {5.0, 0.1};
  r = sgb::mass_bound_check(s, spec, g);
  CHECK(r.bound == doctest::Approx(2.0 * std::exp(2.0)));
  CHECK(r.pass);

  // Zero initial data: the solution stays zero and the bound is met with equality.
  sgb::EnsembleSummary zero;
  r = sgb::mass_bound_check(zero, spec, g);
  CHECK(r.bound == 0.0);
  CHECK(r.pass);
}

TEST_CASE("Wilson intervals") {
  auto [lo, hi] = sgb::wilson_interval(0, 200);
  CHECK(lo == doctest::Approx(0.0).scale(1e-12));
  CHECK(hi == doctest::Approx(3.8414588 / (200 + 3.8414588)).epsilon(1e-6));
  std::tie(lo, hi) = sgb::wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.40383).epsilon(1e-4));
  CHECK(hi == doctest::Approx(0.59617).epsilon(1e-4));
  std::tie(lo, hi) = sgb::wilson_interval(100, 100);
  CHECK(hi == 1.0);
  CHECK(lo < 1.0);
}

TEST_CASE("exceedance curves") {
  const std::vector<double> R{1, 2, 4, 8};
  const std::vector<sgb::EnsembleSummary> ok{exceedance(R, {100, 40, 5, 0}, 100), exceedance(R, {100, 45, 7, 1}, 100)};
  const std::vector<std::string> labels{"m=4", "m=8"};
  auto rep = sgb::nonexplosion_curve(ok, labels);
  CHECK(rep.pass);
  CHECK(rep.curves[1].label == "m=8");
  CHECK(rep.sup_p == std::vector<double>{1.0, 0.45, 0.07, 0.01});

  const std::vector<sgb::EnsembleSummary> rising{exceedance(R, {100, 40, 50, 0}, 100)};
  rep = sgb::nonexplosion_curve(rising, labels);
  CHECK_FALSE(rep.curves[0].nonincreasing);
  CHECK_FALSE(rep.pass);

  const std::vector<sgb::EnsembleSummary> apart{exceedance(R, {100, 10, 0, 0}, 100), exceedance(R, {100, 80, 0, 0}, 100)};
  rep = sgb::nonexplosion_curve(apart, labels);
  CHECK_FALSE(rep.uniform_across_curves);
  CHECK(rep.curves_agree == std::vector<bool>{true, false, true, true});

  // Disagreement above the smallest cut-off is reported but does not fail.
  const std::vector<sgb::EnsembleSummary> truncated{exceedance(R, {100, 40, 0, 0}, 100),
                                                    exceedance(R, {100, 42, 30, 2}, 100)};
  rep = sgb::nonexplosion_curve(truncated, labels, 2.0);
  CHECK(rep.uniform_across_curves);
  CHECK_FALSE(rep.curves_agree[2]);
  CHECK(rep.pass);
  CHECK_FALSE(sgb::nonexplosion_curve(truncated, labels).pass);

  const std::vector<sgb::EnsembleSummary> two{exceedance({1, 2}, {1, 0}, 10)};
  CHECK_THROWS_AS(sgb::nonexplosion_curve(two, labels), sgb::ArgumentError);
}
