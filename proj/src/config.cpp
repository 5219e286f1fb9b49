#include "sgb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "sgb/error.hpp"

namespace sgb {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)).size() != 0) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)).size() != 0) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return n;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long n = to_integer(key, v);
  if (n < 0) throw ConfigError(key + ": must be nonnegative");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + f(v[i]);
  return s;
}

struct Field {
  const char* key;
  bool hashed;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

Field coeff(const char* key, Coefficient ProblemSpec::*member) {
  return {key, true, [member](const ExperimentConfig& c) { return (c.spec.*member).describe(); },
          [member](ExperimentConfig& c, const std::string& v) { c.spec.*member = Coefficient::parse(v); }};
}

Field real(const char* key, std::function<double&(ExperimentConfig&)> ref) {
  return {key, true, [ref](const ExperimentConfig& c) { return fmt(ref(const_cast<ExperimentConfig&>(c))); },
          [ref, key](ExperimentConfig& c, const std::string& v) { ref(c) = to_double(key, v); }};
}

Field real_list(const char* key, std::vector<double> ExperimentConfig::*member) {
  return {key, true, [member](const ExperimentConfig& c) { return join(c.*member, fmt); },
          [member, key](ExperimentConfig& c, const std::string& v) {
            (c.*member).clear();
            for (const auto& s : split_list(v)) (c.*member).push_back(to_double(key, s));
          }};
}

Field int_list(const char* key, std::vector<int> ExperimentConfig::*member) {
  return {key, true, [member](const ExperimentConfig& c) { return join(c.*member, [](int i) { return std::to_string(i); }); },
          [member, key](ExperimentConfig& c, const std::string& v) {
            (c.*member).clear();
            for (const auto& s : split_list(v)) (c.*member).push_back(static_cast<int>(to_integer(key, s)));
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"name", true, [](const ExperimentConfig& c) { return c.name; },
       [](ExperimentConfig& c, const std::string& v) { c.name = v; }},
      {"experiment", true, [](const ExperimentConfig& c) { return c.experiment; },
       [](ExperimentConfig& c, const std::string& v) {
         const auto names = preset_list();
         if (std::find(names.begin(), names.end(), v) == names.end())
           throw ConfigError("experiment: unknown runner '" + v + "'");
         c.experiment = v;
       }},
      {"regime", true, [](const ExperimentConfig& c) { return std::string(to_string(c.spec.regime)); },
       [](ExperimentConfig& c, const std::string& v) { c.spec.regime = regime_from_string(v); }},
      real("lambda", [](ExperimentConfig& c) -> double& { return c.spec.lambda; }),
      real("lambda0", [](ExperimentConfig& c) -> double& { return c.spec.lambda0; }),
      coeff("a", &ProblemSpec::coeff_a),
      coeff("b", &ProblemSpec::coeff_b),
      coeff("c", &ProblemSpec::coeff_c),
      coeff("bbar", &ProblemSpec::coeff_bbar),
      coeff("mu", &ProblemSpec::mu),
      {"sigma1", true,
       [](const ExperimentConfig& c) {
         return std::string(c.spec.sigma_case1.kind == Sigma1Kind::zero ? "zero" : "clamp");
       },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "zero")
           c.spec.sigma_case1.kind = Sigma1Kind::zero;
         else if (v == "clamp")
           c.spec.sigma_case1.kind = Sigma1Kind::clamp;
         else
           throw ConfigError("sigma1: expected clamp or zero, got '" + v + "'");
       }},
      real("sigma1_amplitude", [](ExperimentConfig& c) -> double& { return c.spec.sigma_case1.amplitude; }),
      real("K", [](ExperimentConfig& c) -> double& { return c.spec.K; }),
      {"u0", true, [](const ExperimentConfig& c) { return c.spec.u0.describe(); },
       [](ExperimentConfig& c, const std::string& v) { c.spec.u0 = InitialData::parse(v); }},
      {"cutoff_m", true, [](const ExperimentConfig& c) { return c.spec.cutoff_m ? fmt(*c.spec.cutoff_m) : "none"; },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "none")
           c.spec.cutoff_m.reset();
         else
           c.spec.cutoff_m = to_double("cutoff_m", v);
       }},
      real("theta", [](ExperimentConfig& c) -> double& { return c.spec.theta; }),
      {"flux", true,
       [](const ExperimentConfig& c) { return std::string(c.spec.flux == FluxScheme::central ? "central" : "rusanov"); },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "central")
           c.spec.flux = FluxScheme::central;
         else if (v == "rusanov")
           c.spec.flux = FluxScheme::rusanov;
         else
           throw ConfigError("flux: expected central or rusanov, got '" + v + "'");
       }},
      real("x_min", [](ExperimentConfig& c) -> double& { return c.grid.x_min; }),
      real("x_max", [](ExperimentConfig& c) -> double& { return c.grid.x_max; }),
      {"n_x", true, [](const ExperimentConfig& c) { return std::to_string(c.grid.n_x); },
       [](ExperimentConfig& c, const std::string& v) { c.grid.n_x = static_cast<int>(to_integer("n_x", v)); }},
      real("t_end", [](ExperimentConfig& c) -> double& { return c.grid.t_end; }),
      {"n_t", true, [](const ExperimentConfig& c) { return std::to_string(c.grid.n_t); },
       [](ExperimentConfig& c, const std::string& v) { c.grid.n_t = static_cast<int>(to_integer("n_t", v)); }},
      real("dt_factor", [](ExperimentConfig& c) -> double& { return c.dt_factor; }),
      {"boundary", true, [](const ExperimentConfig& c) { return std::string(to_string(c.grid.boundary)); },
       [](ExperimentConfig& c, const std::string& v) { c.grid.boundary = boundary_from_string(v); }},
      {"n_paths", true, [](const ExperimentConfig& c) { return std::to_string(c.n_paths); },
       [](ExperimentConfig& c, const std::string& v) { c.n_paths = to_count("n_paths", v); }},
      {"master_seed", true, [](const ExperimentConfig& c) { return std::to_string(c.master_seed); },
       [](ExperimentConfig& c, const std::string& v) {
         c.master_seed = static_cast<std::uint64_t>(to_count("master_seed", v));
       }},
      real_list("stop_levels", &ExperimentConfig::stop_levels),
      {"noise", true,
       [](const ExperimentConfig& c) {
         return std::string(c.noise == NoiseConstruction::rectangle_increment ? "rectangle" : "series");
       },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "rectangle")
           c.noise = NoiseConstruction::rectangle_increment;
         else if (v == "series")
           c.noise = NoiseConstruction::series_truncation;
         else
           throw ConfigError("noise: expected rectangle or series, got '" + v + "'");
       }},
      {"series_modes", true, [](const ExperimentConfig& c) { return std::to_string(c.series_modes); },
       [](ExperimentConfig& c, const std::string& v) {
         c.series_modes = static_cast<int>(to_integer("series_modes", v));
       }},
      real("q", [](ExperimentConfig& c) -> double& { return c.q; }),
      real("q_check", [](ExperimentConfig& c) -> double& { return c.q_check; }),
      int_list("space_lags", &ExperimentConfig::space_lags),
      int_list("time_lags", &ExperimentConfig::time_lags),
      {"record_stride", true, [](const ExperimentConfig& c) { return std::to_string(c.record_stride); },
       [](ExperimentConfig& c, const std::string& v) {
         c.record_stride = static_cast<int>(to_integer("record_stride", v));
       }},
      real("burn_in_fraction", [](ExperimentConfig& c) -> double& { return c.burn_in_fraction; }),
      real("window_margin", [](ExperimentConfig& c) -> double& { return c.window_margin; }),
      real("tolerance", [](ExperimentConfig& c) -> double& { return c.tolerance; }),
      {"bootstrap", true, [](const ExperimentConfig& c) { return std::to_string(c.bootstrap); },
       [](ExperimentConfig& c, const std::string& v) { c.bootstrap = to_count("bootstrap", v); }},
      real_list("lambdas", &ExperimentConfig::lambdas),
      real_list("lambda0s", &ExperimentConfig::lambda0s),
      real_list("cutoff_levels", &ExperimentConfig::cutoff_levels),
      {"n_fields", true, [](const ExperimentConfig& c) { return std::to_string(c.n_fields); },
       [](ExperimentConfig& c, const std::string& v) { c.n_fields = to_count("n_fields", v); }},
      {"dump_trajectories", true, [](const ExperimentConfig& c) { return std::string(c.dump_trajectories ? "true" : "false"); },
       [](ExperimentConfig& c, const std::string& v) { c.dump_trajectories = to_bool("dump_trajectories", v); }},
      {"threads", false, [](const ExperimentConfig& c) { return std::to_string(c.threads); },
       [](ExperimentConfig& c, const std::string& v) { c.threads = static_cast<int>(to_integer("threads", v)); }},
      {"output_dir", false, [](const ExperimentConfig& c) { return c.output_dir.string(); },
       [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

std::string render(const ExperimentConfig& c, bool hashed_only) {
  std::string out;
  for (const auto& f : fields()) {
    if (hashed_only && !f.hashed) continue;
    out += f.key;
    out += " = ";
    out += f.get(c);
    out += '\n';
  }
  return out;
}

}  // namespace

GridSpec ExperimentConfig::resolved_grid() const {
  if (grid.n_t > 0) return grid;
  if (!(dt_factor > 0.0)) throw ConfigError("dt_factor must be positive");
  if (grid.n_x <= 0) throw ConfigError("n_x must be positive");
  return GridSpec::with_parabolic_dt(grid.x_min, grid.x_max, grid.n_x, grid.t_end, grid.boundary, dt_factor);
}

EstimatorSettings ExperimentConfig::estimator(Direction d) const {
  const GridSpec g = resolved_grid();
  EstimatorSettings s;
  s.direction = d;
  s.q = q;
  s.lags = d == Direction::space ? space_lags : time_lags;
  s.burn_in = burn_in_fraction * g.t_end;
  s.window = {s.burn_in, g.t_end, g.x_min + window_margin, g.x_max - window_margin};
  s.bootstrap_replicates = bootstrap;
  s.bootstrap_seed = master_seed;
  return s;
}

std::string ExperimentConfig::serialize() const { return render(*this, false); }

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->set(c, value);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(render(*this, true)); }

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_list() {
  return {"noise-validate", "heat-oracle",   "case1-exponents", "case2-surface",
          "mass-bounds",    "nonexplosion",  "kernel-checks",   "localization-consistency"};
}

namespace {

// Desk-scale ensemble grid: 512 cells on [-32, 32], T = 1.
void desk_grid(ExperimentConfig& c) {
  c.grid = {-32.0, 32.0, 512, 1.0, 0, Boundary::periodic};
  c.n_paths = 200;
}

// Exponent grid: 2048 cells on [-32, 32], dx = 1/32, T = 1, states every 16 steps.
void exponent_grid(ExperimentConfig& c) {
  c.grid = {-32.0, 32.0, 2048, 1.0, 0, Boundary::periodic};
  c.n_paths = 100;
  c.spec.u0 = InitialData::parse("constant:1");
  c.space_lags = {1, 2, 4, 8};
  c.time_lags = {16, 32, 64, 128, 256};
  c.record_stride = 16;
}

}  // namespace

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  c.name = std::string(name);
  c.experiment = std::string(name);
  c.spec.coeff_bbar = Coefficient::constant(1.0);
  if (name == "noise-validate") {
    c.grid = {0.0, 8.0, 512, 8.0, 512, Boundary::periodic};
    c.n_fields = 10000;
    c.n_paths = 0;
  } else if (name == "heat-oracle") {
    c.grid = {-8.0, 8.0, 512, 0.5, 0, Boundary::periodic};
    c.spec.coeff_bbar = Coefficient::constant(0.0);
    c.spec.sigma_case1.kind = Sigma1Kind::zero;
    c.spec.u0 = InitialData::parse("bump:1,0,1");
    c.n_paths = 1;
  } else if (name == "case1-exponents") {
    exponent_grid(c);
    c.lambdas = {0.25, 0.5, 1.0};
  } else if (name == "case2-surface") {
    exponent_grid(c);
    c.spec.regime = Regime::case2_superlinear;
    c.spec.cutoff_m = 16.0;
    c.spec.lambda = 0.5;
    c.lambdas = {0.5, 0.9};
    c.lambda0s = {0.0, 0.4};
  } else if (name == "mass-bounds") {
    desk_grid(c);
    c.spec.regime = Regime::case2_superlinear;
    c.spec.lambda = 0.5;
    c.spec.lambda0 = 0.25;
    c.spec.cutoff_m = 16.0;
    c.spec.u0 = InitialData::parse("bump:1,0,2");
  } else if (name == "nonexplosion") {
    desk_grid(c);
    c.spec.regime = Regime::case2_superlinear;
    c.spec.lambda = 0.5;
    c.spec.lambda0 = 0.4;
    c.spec.u0 = InitialData::parse("bump:1,0,2");
    c.cutoff_levels = {4.0, 8.0, 16.0};
    c.stop_levels = {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0};
  } else if (name == "kernel-checks") {
    c.grid = {0.0, 2.0 * std::numbers::pi, 256, 1.0, 1, Boundary::periodic};
    c.n_paths = 100;
  } else if (name == "localization-consistency") {
    desk_grid(c);
    c.n_paths = 50;
    c.spec.regime = Regime::case2_superlinear;
    c.spec.lambda = 0.5;
    c.spec.lambda0 = 0.4;
    c.spec.u0 = InitialData::parse("bump:3,0,2");
    c.cutoff_levels = {4.0, 8.0, 16.0};
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

}  // namespace sgb
