#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "sgb/error.hpp"
#include "sgb/noise.hpp"

namespace {

sgb::GridSpec small_grid(sgb::Boundary b = sgb::Boundary::periodic) {
  sgb::GridSpec g;
  g.x_min = 0;
  g.x_max = 2;
  g.n_x = 16;
  g.t_end = 1;
  g.n_t = 8;
  g.boundary = b;
  return g;
}

double basis_gram(const sgb::BasisFamily& f, int k, int l) {
  double s = 0;
  for (int j = 0; j < f.domain.n_x; ++j) s += f.eval(k, j) * f.eval(l, j);
  return s * f.domain.dx();
}

}  // namespace

TEST_CASE("rectangle noise: parallel, serial and lazy rows agree bit for bit") {
  auto g = small_grid();
  g.n_x = 100;
  g.n_t = 37;
  const auto par = sgb::generate_rectangle_noise(g, 7, 3);
  const auto ser = sgb::generate_rectangle_noise_serial(g, 7, 3);
  REQUIRE(par.increments().size() == ser.increments().size());
  CHECK(std::equal(par.increments().begin(), par.increments().end(), ser.increments().begin()));

  const sgb::RectangleNoiseStream lazy(g, 7, 3);
  std::vector<double> row(g.n_x), part(13);
  for (int n = 0; n < g.n_t; ++n) {
    lazy.row(n, row);
    const auto ref = par.row_view(n);
    CHECK(std::equal(row.begin(), row.end(), ref.begin()));
    lazy.row_range(n, 41, part);
    CHECK(std::equal(part.begin(), part.end(), ref.begin() + 41));
  }
}

TEST_CASE("rectangle noise cells have variance dt*dx") {
  auto g = small_grid();
  g.n_x = 256;
  g.n_t = 256;
  const auto f = sgb::generate_rectangle_noise(g, 11);
  std::vector<double> scaled(f.increments().begin(), f.increments().end());
  const double s = std::sqrt(g.dt() * g.dx());
  for (double& v : scaled) v /= s;
  const auto m = sgb::sample_moments(scaled);
  CHECK(std::abs(m.mean) < 5.0 / std::sqrt(double(m.count)));
  CHECK(std::abs(m.variance - 1.0) < 5.0 * m.variance_stderr);
  CHECK(std::abs(m.kurtosis - 3.0) < 5.0 * m.kurtosis_stderr);
}

TEST_CASE("basis families are orthonormal on the grid") {
  SUBCASE("trigonometric, full and partial") {
    for (int modes : {16, 9}) {
      const sgb::BasisFamily f{sgb::BasisKind::trigonometric, modes, small_grid()};
      f.validate();
      for (int k = 0; k < modes; ++k)
        for (int l = 0; l < modes; ++l) CHECK(basis_gram(f, k, l) == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
  SUBCASE("haar") {
    const auto g = small_grid(sgb::Boundary::dirichlet_zero);
    const auto f = sgb::BasisFamily::default_for(g, 16);
    CHECK(f.kind == sgb::BasisKind::haar);
    for (int k = 0; k < 16; ++k)
      for (int l = 0; l < 16; ++l) CHECK(basis_gram(f, k, l) == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-12));
  }
  SUBCASE("aliasing and bad sizes are rejected") {
    CHECK_THROWS_AS((sgb::BasisFamily{sgb::BasisKind::trigonometric, 17, small_grid()}.validate()), sgb::ConfigError);
    auto g = small_grid(sgb::Boundary::dirichlet_zero);
    g.n_x = 12;
    CHECK_THROWS_AS((sgb::BasisFamily{sgb::BasisKind::haar, 4, g}.validate()), sgb::ConfigError);
  }
}

TEST_CASE("fast series transforms match direct summation") {
  for (auto b : {sgb::Boundary::periodic, sgb::Boundary::dirichlet_zero}) {
    auto g = small_grid(b);
    g.n_x = 64;
    g.n_t = 5;
    for (int modes : {64, 20, 1}) {
      const auto basis = sgb::BasisFamily::default_for(g, modes);
      const auto fast = sgb::generate_series_noise(g, basis, 5, 2);
      const auto direct = sgb::generate_series_noise_direct(g, basis, 5, 2);
      const auto a = fast.increments(), d = direct.increments();
      REQUIRE(a.size() == d.size());
      double peak = 0, worst = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        peak = std::max(peak, std::abs(d[i]));
        worst = std::max(worst, std::abs(a[i] - d[i]));
      }
      CHECK(worst <= 1e-12 * peak);
      const sgb::SeriesNoiseStream lazy(g, basis, 5, 2);
      std::vector<double> row(g.n_x);
      lazy.row(3, row);
      for (int j = 0; j < g.n_x; ++j) CHECK(std::abs(row[j] - fast.row_view(3)[j]) <= 1e-12 * peak);
    }
  }
}

TEST_CASE("empirical covariance reproduces the rectangle overlap") {
  auto g = small_grid();
  g.n_x = 8;
  g.x_max = 1;
  g.n_t = 8;
  const sgb::Rect a{0, 0.5, 0, 0.5}, b{0.25, 0.75, 0.25, 0.75}, far{0.5, 1, 0.5, 1}, left{0, 0.5, 0, 0.5};
  const std::vector<sgb::RectPair> pairs{{a, a}, {a, b}, {left, far}};
  CHECK(a.area() == doctest::Approx(0.25));
  CHECK(a.intersect(b).area() == doctest::Approx(0.0625));
  CHECK(left.intersect(far).area() == doctest::Approx(0.0));

  const std::size_t n = 20000;
  const auto rect = sgb::validate_covariance(n, [&](std::size_t i) {
    return std::make_unique<sgb::RectangleNoiseStream>(g, 99, static_cast<std::uint32_t>(i));
  }, pairs);
  REQUIRE(rect.probes.size() == 3);
  CHECK(rect.probes[0].target == doctest::Approx(0.25));
  CHECK(rect.probes[1].target == doctest::Approx(0.0625));
  CHECK(rect.probes[2].target == doctest::Approx(0.0));
  CHECK(rect.max_abs_z() < 4.5);

  const auto basis = sgb::BasisFamily::default_for(g, g.n_x);
  const auto series = sgb::validate_covariance(n, [&](std::size_t i) {
    return std::make_unique<sgb::SeriesNoiseStream>(g, basis, 99, static_cast<std::uint32_t>(i));
  }, pairs);
  CHECK(series.max_abs_z() < 4.5);
  for (double z : sgb::covariance_discrepancy(rect, series)) CHECK(std::abs(z) < 4.5);
}

TEST_CASE("covariance probes reject bad input") {
  const auto g = small_grid();
  const std::vector<sgb::RectPair> misaligned{{{0, 0.5, 0.01, 0.5}, {0, 0.5, 0, 0.5}}};
  auto make = [&](std::size_t i) { return std::make_unique<sgb::RectangleNoiseStream>(g, 1, std::uint32_t(i)); };
  CHECK_THROWS_AS(sgb::validate_covariance(10, make, misaligned), sgb::ArgumentError);
  const std::vector<sgb::RectPair> ok{{{0, 0.5, 0, 0.5}, {0, 0.5, 0, 0.5}}};
  CHECK_THROWS_AS(sgb::validate_covariance(0, make, ok), sgb::ArgumentError);
}

TEST_CASE("noise dumps round-trip") {
  const auto g = small_grid();
  const auto f = sgb::generate_rectangle_noise(g, 3);
  const auto path = std::filesystem::temp_directory_path() / "sgb_noise_roundtrip.bin";
  sgb::write_noise_dump(path, f);
  const auto back = sgb::read_noise_dump(path);
  CHECK(back.grid().n_x == g.n_x);
  CHECK(back.grid().n_t == g.n_t);
  CHECK(back.grid().dx() == doctest::Approx(g.dx()));
  CHECK(back.grid().dt() == doctest::Approx(g.dt()));
  CHECK(std::equal(f.increments().begin(), f.increments().end(), back.increments().begin()));
  std::filesystem::remove(path);
}
