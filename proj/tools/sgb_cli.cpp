// Command-line front end: run presets or config files, list presets, validate
// configs and re-render stored reports.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sgb/config.hpp"
#include "sgb/error.hpp"
#include "sgb/experiments.hpp"

namespace {

sgb::ExperimentConfig resolve(const std::string& target) {
  const auto names = sgb::preset_list();
  for (const auto& n : names)
    if (n == target) return sgb::preset(n);
  if (!std::filesystem::exists(target))
    throw sgb::ConfigError("'" + target + "' is neither a preset nor a readable config file");
  return sgb::ExperimentConfig::load(target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic generalized Burgers equation: simulation and regularity checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sgb::kCodeVersion));

  std::string target;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, nx;
  std::optional<std::size_t> paths;
  std::optional<std::string> out;
  bool dump = false;

  auto* run = app.add_subcommand("run", "Run a preset or a config file");
  run->add_option("target", target, "Preset name or config file")->required();
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--threads", threads, "Thread cap (0 = all)");
  run->add_option("--out", out, "Output directory");
  run->add_option("--paths", paths, "Paths per ensemble");
  run->add_option("--nx", nx, "Spatial cells");
  run->add_flag("--dump-trajectories", dump, "Write one binary trajectory per ensemble");

  auto* list = app.add_subcommand("list", "List presets");

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Preset name or config file")->required();

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Render stored reports as text");
  report->add_option("dir", report_dir, "Output directory or report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& n : sgb::preset_list()) std::cout << n << "\n";
      return sgb::exit_ok;
    }
    if (*validate) {
      const auto cfg = resolve(config_path);
      const auto grid = cfg.resolved_grid();
      cfg.spec.validate(grid);
      std::cout << "ok: " << cfg.name << " (" << cfg.experiment << "), config " << cfg.hash_hex() << ", grid "
                << grid.n_x << " x " << grid.n_t << "\n";
      return sgb::exit_ok;
    }
    if (*report) {
      std::cout << sgb::render_report(report_dir);
      return sgb::exit_ok;
    }

    auto cfg = resolve(target);
    if (seed) cfg.master_seed = *seed;
    if (threads) cfg.threads = *threads;
    if (paths) cfg.n_paths = *paths;
    if (nx) cfg.grid.n_x = *nx;
    if (dump) cfg.dump_trajectories = true;
    if (out)
      cfg.output_dir = *out;
    else if (const char* env = std::getenv("SGB_OUTPUT_DIR"))
      cfg.output_dir = env;
    return sgb::run_experiment(cfg, std::cerr);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sgb::exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return sgb::exit_runtime;
  }
}
