// Runs the preset suite and prints one PASS/FAIL line per acceptance criterion.
// Usage: sgb_acceptance [output_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sgb/config.hpp"
#include "sgb/experiments.hpp"
#include "sgb/io.hpp"
#include "support/calibration.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  json report;
  double seconds = 0;
  bool ok = false;
};

Run run_preset(const std::string& name, const fs::path& out) {
  auto cfg = sgb::preset(name);
  cfg.output_dir = out;
  std::ostringstream log;
  const int code = sgb::run_experiment(cfg, log);
  std::cerr << log.str();
  Run r;
  r.ok = code == sgb::exit_ok;
  const auto path = out / cfg.name / "report.json";
  if (fs::exists(path)) {
    r.report = json::parse(sgb::io::read_text(path));
    r.seconds = r.report["timestamp"].value("runtime_seconds", 0.0);
  }
  return r;
}

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance-out");
  std::map<std::string, Run> runs;
  auto get = [&](const std::string& name) -> const Run& {
    auto it = runs.find(name);
    if (it == runs.end()) it = runs.emplace(name, run_preset(name, out)).first;
    return it->second;
  };
  auto guarded = [&](int id, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("exception: ") + e.what());
    }
  };

  guarded(1, [&] {
    const auto& r = get("noise-validate");
    const auto& res = r.report.at("result");
    const double z = res.at("covariance").at("max_abs_z");
    const double secs = r.report.at("timestamp").at("sections").at("/covariance_seconds");
    const std::size_t n = res.at("covariance").at("n_fields");
    const std::size_t probes = res.at("covariance").at("probes").size();
    verdict(1, r.ok && res.at("covariance_pass") && n >= 10000 && probes == 10 && secs <= 120,
            fmt("%zu fields, %zu probe pairs, max |z| = %.2f (limit 4), %.1f s", n, probes, z, secs));
  });
  guarded(2, [&] {
    const auto& r = get("noise-validate");
    const auto& res = r.report.at("result");
    const double z = res.at("series_vs_rectangle_max_abs_z");
    const double secs = r.report.at("timestamp").at("sections").at("/series_seconds");
    verdict(2, res.at("series_pass") && secs <= 120,
            fmt("full-mode series vs rectangle, max |z| = %.2f (limit 5), %.1f s", z, secs));
  });
  guarded(3, [&] {
    const auto& r = get("heat-oracle");
    const double err = r.report.at("result").at("relative_l2_error");
    verdict(3, r.ok && r.report.at("pass") && r.seconds <= 10,
            fmt("relative L2 error %.2e (limit 1e-3), %.2f s", err, r.seconds));
  });
  guarded(4, [&] {
    const auto& r = get("kernel-checks");
    const auto& res = r.report.at("result");
    double worst = 0;
    for (const auto& i : res.at("integrals")) worst = std::max(worst, i.at("abs_error").get<double>());
    const double slope = res.at("singular_slope").at("slope");
    const auto& ref = res.at("l2_refinement");
    const bool pass = res.at("integrals_pass") && res.at("singular_slope").at("pass") && ref.at("pass") &&
                      r.seconds <= 60;
    verdict(4, pass,
            fmt("max |integral - 1| = %.1e, slope %.3f, refinement kappa=0.25 %s / kappa=0 %s, %.1f s", worst, slope,
                ref.at("kappa_0.25").at("converged").get<bool>() ? "converges" : "does not converge",
                ref.at("kappa_0").at("converged").get<bool>() ? "converges" : "does not converge", r.seconds));
  });
  guarded(5, [&] {
    const auto& sp = get("kernel-checks").report.at("result").at("spectral");
    const std::size_t fields = sp.at("fields");
    const std::size_t violations = sp.at("multiplicative_violations");
    verdict(5, sp.at("isometry_pass") && sp.at("multiplicative_pass") && fields >= 100,
            fmt("%zu fields, isometry %.1e, composition %.1e, %zu multiplicative violations", fields,
                sp.at("isometry_max_rel_error").get<double>(), sp.at("composition_max_rel_error").get<double>(),
                violations));
  });
  guarded(6, [&] {
    const auto& r = get("mass-bounds");
    const auto& res = r.report.at("result");
    const std::size_t n1 = res.at("case1").at("positivity").at("negative_points");
    const std::size_t n2 = res.at("case2").at("positivity").at("negative_points");
    const std::size_t p1 = res.at("case1").at("summary").at("n_paths");
    const std::size_t p2 = res.at("case2").at("summary").at("n_paths");
    verdict(6, res.at("positivity_pass") && p1 >= 200 && p2 >= 200 && r.seconds <= 600,
            fmt("negative points case1 %zu / case2 %zu over %zu + %zu paths, %.1f s", n1, n2, p1, p2, r.seconds));
  });
  guarded(7, [&] {
    const auto& r = get("mass-bounds");
    const auto& res = r.report.at("result");
    const auto& b = res.at("case2").at("bound");
    const auto& z = res.at("zero_noise_control");
    verdict(7, b.at("pass") && z.at("pass") && r.seconds <= 600,
            fmt("E sup sqrt mass %.3f + 3 se %.3f <= %.3f; zero-noise mass drift %.1e (limit 1e-8)",
                b.at("mean").get<double>(), 3 * b.at("stderr").get<double>(), b.at("bound").get<double>(),
                z.at("relative_mass_drift").get<double>()));
  });
  guarded(8, [&] {
    const auto& r = get("localization-consistency");
    const auto& res = r.report.at("result");
    verdict(8, r.ok && r.report.at("pass") && r.seconds <= 300,
            fmt("%d/%d paths reach level %g, max diff before hitting %.1e, hitting times %s, %.1f s",
                res.at("paths_reaching_level").get<int>(), res.at("paths").get<int>(), res.at("level").get<double>(),
                res.at("max_abs_diff_before_hitting").get<double>(),
                res.at("hitting_times_agree").get<bool>() ? "agree" : "differ", r.seconds));
  });
  auto exponent_line = [](const json& v) {
    std::string s;
    for (const auto& c : v.at("cells"))
      s += fmt(" [lambda %g lambda0 %g: space %.3f, time %.3f]", c.at("lambda").get<double>(),
               c.at("lambda0").get<double>(), c.at("space").at("exponent_hat").get<double>(),
               c.at("time").at("exponent_hat").get<double>());
    return s;
  };
  guarded(9, [&] {
    const auto& r = get("case1-exponents");
    const auto& v = r.report.at("result").at("verification");
    verdict(9, r.ok && v.at("pass") && r.seconds <= 3600,
            "CIs overlap: " + std::string(v.at("space_cis_overlap").get<bool>() ? "yes" : "no") + ";" +
                exponent_line(v) + fmt("; %.0f s", r.seconds));
  });
  guarded(10, [&] {
    const auto& r = get("case2-surface");
    const auto& v = r.report.at("result").at("verification");
    verdict(10, r.ok && v.at("pass") && r.seconds <= 3600, "one-sided;" + exponent_line(v) + fmt("; %.0f s", r.seconds));
  });
  guarded(11, [&] {
    const auto& r = get("nonexplosion");
    const auto& res = r.report.at("result");
    std::string sup;
    for (const auto& p : res.at("case2").at("sup_p")) sup += fmt(" %.3f", p.get<double>());
    verdict(11, r.ok && r.report.at("pass") && r.seconds <= 600,
            "sup_m P(sup > R):" + sup + fmt("; uniform across m for R <= %g: ", res.at("case2").at("uniform_up_to").get<double>()) +
                (res.at("case2").at("uniform_across_curves").get<bool>() ? "yes" : "no") + fmt("; %.1f s", r.seconds));
  });
  guarded(12, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    for (double H : {0.25, 0.5, 0.75}) {
      const auto rep = calib::fbm_estimate(H, std::size_t{1} << 14, 100, 20240611);
      pass = pass && std::abs(rep.exponent_hat - H) <= 0.05;
      detail += fmt(" H=%.2f -> %.3f [%.3f, %.3f];", H, rep.exponent_hat, rep.ci_low, rep.ci_high);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    verdict(12, pass && secs <= 300, "fBm recovery:" + detail + fmt(" %.1f s", secs));
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
