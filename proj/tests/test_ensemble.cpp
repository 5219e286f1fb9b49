#include <doctest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "sgb/ensemble.hpp"
#include "sgb/error.hpp"

namespace {

struct Setup {
  sgb::ProblemSpec spec;
  sgb::GridSpec grid = sgb::GridSpec::with_parabolic_dt(-8, 8, 64, 0.5, sgb::Boundary::periodic);
  sgb::EnsembleOptions opt;
  Setup() {
    spec.regime = sgb::Regime::case2_superlinear;
    spec.lambda = 0.5;
    spec.lambda0 = 0.25;
    spec.cutoff_m = 8.0;
    spec.coeff_bbar = sgb::Coefficient::constant(1.0);
    spec.u0 = sgb::InitialData::parse("bump:1,0,2");
    opt.n_paths = 12;
    opt.master_seed = 77;
    opt.stop_levels = {0.5, 1.0, 1.5, 2.0, 100.0};
    opt.burn_in_time = 0.05;
  }
};

}  // namespace

TEST_CASE("parallel ensembles reproduce the serial reference") {
  Setup s;
  const auto serial = sgb::run_ensemble_serial(s.spec, s.grid, s.opt).to_json().dump();
  for (int threads : {1, 2, 4}) {
    s.opt.threads = threads;
    CHECK(sgb::run_ensemble(s.spec, s.grid, s.opt).to_json().dump() == serial);
  }
  s.opt.noise = sgb::NoiseConstruction::series_truncation;
  s.opt.series_modes = 32;
  CHECK(sgb::run_ensemble(s.spec, s.grid, s.opt).to_json().dump() ==
        sgb::run_ensemble_serial(s.spec, s.grid, s.opt).to_json().dump());
}

TEST_CASE("a path depends only on its index and the master seed") {
  Setup s;
  const auto a = sgb::simulate_path(s.spec, s.grid, s.opt, 5);
  s.opt.n_paths = 40;
  s.opt.threads = 3;
  const auto b = sgb::simulate_path(s.spec, s.grid, s.opt, 5);
  CHECK(a.states == b.states);
  const auto c = sgb::simulate_path(s.spec, s.grid, s.opt, 6);
  CHECK(a.states != c.states);
  s.opt.master_seed = 78;
  CHECK(sgb::simulate_path(s.spec, s.grid, s.opt, 5).states != a.states);
}

TEST_CASE("the per-path callback sees every path once") {
  Setup s;
  std::vector<std::atomic<int>> seen(s.opt.n_paths);
  s.opt.evolve.keep_states = true;
  s.opt.on_path = [&](std::size_t i, const sgb::SolutionPath& p) {
    seen[i]++;
    CHECK(p.path_index == i);
    CHECK(p.n_recorded() > 0);
  };
  sgb::run_ensemble(s.spec, s.grid, s.opt);
  for (auto& c : seen) CHECK(c.load() == 1);
}

TEST_CASE("summary statistics are consistent") {
  Setup s;
  const auto sum = sgb::run_ensemble(s.spec, s.grid, s.opt);
  CHECK(sum.n_paths == s.opt.n_paths);
  CHECK(sum.paths.size() == s.opt.n_paths);
  CHECK(sum.spec_hash == sgb::spec_hash(s.spec));
  REQUIRE(sum.per_level.size() == s.opt.stop_levels.size());
  for (std::size_t k = 1; k < sum.per_level.size(); ++k) CHECK(sum.per_level[k].count <= sum.per_level[k - 1].count);
  CHECK(sum.per_level.front().p_exceed == 1.0);  // u0 peaks at 1 > 0.5
  CHECK(sum.per_level.back().count == 0);
  CHECK(sum.explosion_fraction == 0.0);

  double mean = 0;
  for (const auto& p : sum.paths) mean += p.sup_sqrt_mass;
  mean /= double(sum.n_paths);
  CHECK(sum.sup_sqrt_mass.mean == doctest::Approx(mean));
  CHECK(sum.sup_sqrt_mass.stderr_ > 0.0);
  CHECK(sum.initial_mass.mean == doctest::Approx(2.0 * std::sqrt(2.0 * std::acos(-1.0))).epsilon(1e-4));
  CHECK(sum.initial_mass.stderr_ == doctest::Approx(0.0));

  const auto j = sum.to_json();
  for (const char* key : {"n_paths", "master_seed", "spec_hash", "aggregates", "per_level", "grid"})
    CHECK(j.contains(key));
}

TEST_CASE("path diagnostics from a recorded trajectory") {
  Setup s;
  const auto p = sgb::simulate_path(s.spec, s.grid, s.opt, 0);
  const auto d = sgb::diagnose(p, s.opt.stop_levels);
  double sup = 0, supm = 0;
  for (double v : p.sup_series) sup = std::max(sup, v);
  for (double m : p.mass_series) supm = std::max(supm, std::sqrt(m));
  CHECK(d.sup_abs == sup);
  CHECK(d.sup_sqrt_mass == doctest::Approx(supm));
  CHECK(d.initial_mass == p.mass_series.front());
  REQUIRE(d.hitting_steps.size() == s.opt.stop_levels.size());
  CHECK(d.hitting_steps.front() == 0);
  CHECK(d.hitting_steps.back() == -1);
}

TEST_CASE("worker exceptions reach the caller") {
  Setup s;
  s.spec.lambda0 = 0.7;
  CHECK_THROWS_AS(sgb::run_ensemble(s.spec, s.grid, s.opt), sgb::ValidationError);
}
