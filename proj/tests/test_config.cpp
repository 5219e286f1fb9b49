#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sgb/config.hpp"
#include "sgb/error.hpp"
#include "sgb/experiments.hpp"
#include "sgb/io.hpp"

namespace fs = std::filesystem;

TEST_CASE("preset list is fixed") {
  const std::vector<std::string> expected{"noise-validate", "heat-oracle",  "case1-exponents", "case2-surface",
                                          "mass-bounds",    "nonexplosion", "kernel-checks",   "localization-consistency"};
  CHECK(sgb::preset_list() == expected);
  for (const auto& name : expected) {
    const auto cfg = sgb::preset(name);
    CHECK(cfg.name == name);
    CHECK(cfg.experiment == name);
    CHECK_NOTHROW(cfg.spec.validate(cfg.resolved_grid()));
  }
  CHECK_THROWS_AS(sgb::preset("nope"), sgb::ConfigError);

  const auto c1 = sgb::preset("case1-exponents");
  CHECK(c1.spec.regime == sgb::Regime::case1_bounded_lipschitz);
  CHECK(c1.lambdas.size() >= 3);
  const auto c2 = sgb::preset("case2-surface");
  CHECK(c2.spec.regime == sgb::Regime::case2_superlinear);
  CHECK(c2.spec.cutoff_m.has_value());
  CHECK(sgb::preset("nonexplosion").cutoff_levels.size() >= 3);
  CHECK(sgb::preset("nonexplosion").stop_levels.size() >= 3);
}

TEST_CASE("configs round-trip through their canonical text") {
  for (const auto& name : sgb::preset_list()) {
    CAPTURE(name);
    const auto cfg = sgb::preset(name);
    const auto text = cfg.serialize();
    const auto back = sgb::ExperimentConfig::parse(text);
    CHECK(back.serialize() == text);
    CHECK(back.hash() == cfg.hash());
  }
}

TEST_CASE("config hashing ignores run-only keys") {
  auto cfg = sgb::preset("mass-bounds");
  const auto h = cfg.hash();
  CHECK(cfg.hash_hex().size() == 16);
  cfg.threads = 3;
  cfg.output_dir = "elsewhere";
  CHECK(cfg.hash() == h);
  cfg.master_seed += 1;
  CHECK(cfg.hash() != h);
  cfg = sgb::preset("mass-bounds");
  cfg.spec.lambda0 = 0.125;
  CHECK(cfg.hash() != h);
}

TEST_CASE("config parsing errors and comments") {
  const auto base = sgb::preset("heat-oracle").serialize();
  CHECK_THROWS_AS(sgb::ExperimentConfig::parse(base + "bogus = 1\n"), sgb::ConfigError);
  CHECK_THROWS_AS(sgb::ExperimentConfig::parse("n_x = many\n"), sgb::ConfigError);
  CHECK_THROWS_AS(sgb::ExperimentConfig::parse("no equals sign\n"), sgb::ConfigError);
  const auto cfg = sgb::ExperimentConfig::parse("# comment\n\nexperiment = mass-bounds\nlambda0 = 0.3  # inline\nstop_levels = 1, 2, 4\n");
  CHECK(cfg.experiment == "mass-bounds");
  CHECK(cfg.spec.lambda0 == doctest::Approx(0.3));
  CHECK(cfg.stop_levels == std::vector<double>{1, 2, 4});
}

TEST_CASE("resolved grid uses the parabolic step when n_t is zero") {
  auto cfg = sgb::preset("heat-oracle");
  cfg.grid.n_t = 0;
  const auto g = cfg.resolved_grid();
  CHECK(g.dt() <= cfg.dt_factor * g.dx() * g.dx() * (1 + 1e-12));
  const auto e = cfg.estimator(sgb::Direction::space);
  CHECK(e.window.x0 == doctest::Approx(g.x_min + cfg.window_margin));
  CHECK(e.window.t1 == doctest::Approx(g.t_end));
  CHECK(e.bootstrap_seed == cfg.master_seed);
}

TEST_CASE("invalid exponents map to the validation exit code") {
  auto cfg = sgb::preset("mass-bounds");
  cfg.spec.lambda0 = 0.6;
  cfg.output_dir = fs::temp_directory_path() / "sgb_bad_lambda0";
  std::ostringstream log;
  CHECK(sgb::run_experiment(cfg, log) == sgb::exit_validation);
  CHECK(log.str().find("λ_0∈[0,1/2)") != std::string::npos);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("reports are reproducible and carry provenance") {
  auto cfg = sgb::preset("heat-oracle");
  cfg.grid.n_x = 128;
  const auto dir = fs::temp_directory_path() / "sgb_repro";
  auto run = [&](const fs::path& out) {
    cfg.output_dir = out;
    std::ostringstream log;
    REQUIRE(sgb::run_experiment(cfg, log) == sgb::exit_ok);
    auto j = nlohmann::json::parse(sgb::io::read_text(out / cfg.name / "report.json"));
    CHECK(j.contains("timestamp"));
    j.erase("timestamp");
    return j;
  };
  const auto a = run(dir / "a");
  const auto b = run(dir / "a");
  CHECK(a == b);
  CHECK_FALSE(a.at("result").contains("solver_seconds"));
  CHECK(a.at("config_hash") == cfg.hash_hex());
  CHECK(a.at("master_seed") == cfg.master_seed);
  CHECK(a.at("code_version") == std::string(sgb::kCodeVersion));
  CHECK(fs::exists(dir / "a" / cfg.name / "config.txt"));
  const auto again = sgb::ExperimentConfig::load(dir / "a" / cfg.name / "config.txt");
  CHECK(again.hash() == cfg.hash());
  CHECK(sgb::render_report(dir / "a").find("heat-oracle") != std::string::npos);
  fs::remove_all(dir);
}
