#include "spvar/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include <sstream>
#include <thread>

#include "spvar/coulomb.hpp"
#include "spvar/diagnostics.hpp"
#include "spvar/radial.hpp"
#include "spvar/semiclassical.hpp"
#include "spvar/solvers.hpp"

namespace spvar {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Shortest decimal text that reads back to the same double.
std::string exact_str(double v) { return fmt::format("{}", v); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// ---------------------------------------------------------------- parsing

struct Entry {
  std::string value;
  int line = 0;
  int column = 0;  // of the value
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "mode",           "grid.n",          "grid.L",           "grid.center",         "rho.variant",
      "rho.rho0",       "rho.s",           "rho.a",            "rho.sigma",           "rho.xb",
      "rho.beta",       "rho.alpha",       "rho.k",            "params.p",            "params.mu",
      "params.lambda",  "params.eps",      "solver.tol",       "solver.max_iter",     "solver.method",
      "solver.seed_amplitude", "solver.seed_width", "solver.seed_center", "sweep.mu", "sweep.eps",
      "sweep.L_ref",    "sweep.parallel",  "rng.seed",         "output.directory",    "output.formats"};
  return keys;
}

const char* variant_name(ChargeVariant v) {
  switch (v) {
    case ChargeVariant::Constant: return "constant";
    case ChargeVariant::CoercivePower: return "coercive_power";
    case ChargeVariant::BumpedConstant: return "bumped_constant";
    case ChargeVariant::ExpCoercive: return "exp_coercive";
  }
  return "?";
}

// Parameter keys each variant reads, besides rho.variant.
std::vector<std::string> variant_keys(ChargeVariant v) {
  switch (v) {
    case ChargeVariant::Constant: return {"rho0", "k"};
    case ChargeVariant::CoercivePower: return {"rho0", "s", "k"};
    case ChargeVariant::BumpedConstant: return {"rho0", "a", "sigma", "xb", "k"};
    case ChargeVariant::ExpCoercive: return {"rho0", "beta", "alpha", "k"};
  }
  return {};
}

const char* method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::Auto: return "auto";
    case SolveMethod::MountainPass: return "mountain_pass";
    case SolveMethod::Nehari: return "nehari";
  }
  return "?";
}

class Reader {
 public:
  std::vector<std::string> errors;
  std::map<std::string, Entry> entries;

  void parse(std::string_view text) {
    std::map<std::string, int> first_line;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      const auto start = line.find_first_not_of(" \t\r");
      if (start == std::string_view::npos) continue;
      std::size_t i = start;
      auto key_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
      while (i < line.size() && key_char(line[i])) ++i;
      const std::string key(line.substr(start, i - start));
      if (key.empty()) {
        err(line_no, static_cast<int>(start) + 1, fmt::format("expected a key, found '{}'", line[start]));
        continue;
      }
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size() || line[i] != '=') {
        err(line_no, static_cast<int>(i) + 1,
            i >= line.size() ? std::string("expected '=' after key") : fmt::format("expected '=', found '{}'", line[i]));
        continue;
      }
      ++i;
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      const std::string value = trim(line.substr(i));
      if (value.empty()) {
        err(line_no, static_cast<int>(i) + 1, fmt::format("missing value for '{}'", key));
        continue;
      }
      const auto& keys = known_keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        err(line_no, static_cast<int>(start) + 1, fmt::format("unknown key '{}'", key));
        continue;
      }
      if (auto it = first_line.find(key); it != first_line.end()) {
        err(line_no, static_cast<int>(start) + 1, fmt::format("duplicate key '{}' (first set on line {})", key, it->second));
        continue;
      }
      first_line[key] = line_no;
      entries[key] = {value, line_no, static_cast<int>(i) + 1};
    }
  }

  void err(int line, int col, const std::string& msg) { errors.push_back(fmt::format("line {}, column {}: {}", line, col, msg)); }
  void bad(const std::string& key, const std::string& what) {
    const Entry& e = entries.at(key);
    err(e.line, e.column, fmt::format("{}: expected {}, got '{}'", key, what, e.value));
  }
  bool has(const std::string& key) const { return entries.count(key) > 0; }

  static std::optional<double> to_double(std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
  }
  static std::optional<std::vector<double>> to_list(std::string_view s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = std::min(s.find(',', pos), s.size());
      const auto v = to_double(s.substr(pos, comma - pos));
      if (!v) return std::nullopt;
      out.push_back(*v);
      if (comma == s.size()) break;
      pos = comma + 1;
    }
    return out;
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (auto v = to_double(entries.at(key).value)) out = *v;
    else bad(key, "a number");
  }
  void integer(const std::string& key, long long& out) {
    if (!has(key)) return;
    const std::string& s = entries.at(key).value;
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) bad(key, "an integer");
    else out = v;
  }
  void vec3(const std::string& key, Vec3& out) {
    if (!has(key)) return;
    const auto v = to_list(entries.at(key).value);
    if (!v || v->size() != 3) bad(key, "three comma-separated numbers");
    else out = {(*v)[0], (*v)[1], (*v)[2]};
  }
  void list(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    if (auto v = to_list(entries.at(key).value)) out = *v;
    else bad(key, "a comma-separated list of numbers");
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const std::string& s = entries.at(key).value;
    if (s == "true") out = true;
    else if (s == "false") out = false;
    else bad(key, "true or false");
  }
  // Admissibility failures carry the position of the key that triggered them.
  void invalid(const std::string& key, const std::string& msg) {
    if (has(key)) {
      const Entry& e = entries.at(key);
      errors.push_back(fmt::format("line {}, column {}: {}", e.line, e.column, msg));
    } else {
      errors.push_back(msg);
    }
  }
};

void check_modes(Reader& r, ExperimentConfig& cfg) {
  const ProblemParams& pp = cfg.params;
  const bool solves = cfg.mode == Mode::Solve || cfg.mode == Mode::Diagnose || cfg.mode == Mode::SweepMu ||
                      cfg.mode == Mode::SweepEps;
  if (solves) {
    if (!(pp.p > 2.0 && pp.p < 5.0)) r.invalid("params.p", fmt::format("p = {} must lie in (2, 5) for {}", pp.p, mode_name(cfg.mode)));
    if (pp.p > 2.0 && pp.p < 3.0 && !(2.0 * (pp.p - 2.0) + cfg.rho.k * (pp.p - 1.0) > 0.0))
      r.invalid("rho.k", k_threshold_message(cfg.rho.k, pp.p));
    if (cfg.method == SolveMethod::Nehari && !(pp.p > 3.0 && pp.p < 5.0))
      r.invalid("solver.method", "solver.method = nehari needs p in (3, 5)");
  }
  if (cfg.mode == Mode::Sobolev && !(pp.p > 1.0 && pp.p < 5.0)) r.invalid("params.p", "sobolev needs p in (1, 5)");
  if (cfg.mode == Mode::SweepMu) {
    if (cfg.mu_values.empty()) r.invalid("sweep.mu", "sweep_mu needs sweep.mu");
    for (std::size_t i = 0; i < cfg.mu_values.size(); ++i) {
      if (!(cfg.mu_values[i] >= 0.5 && cfg.mu_values[i] <= 1.0)) r.invalid("sweep.mu", "sweep.mu values must lie in [1/2, 1]");
    }
    if (!std::is_sorted(cfg.mu_values.begin(), cfg.mu_values.end(), std::less_equal<>()))
      r.invalid("sweep.mu", "sweep.mu must be ascending");
  }
  if (cfg.mode == Mode::SweepEps) {
    if (cfg.eps_values.empty()) r.invalid("sweep.eps", "sweep_eps needs sweep.eps");
    for (std::size_t i = 0; i < cfg.eps_values.size(); ++i) {
      ProblemParams pe = pp;
      pe.eps = cfg.eps_values[i];
      try {
        require_semiclassical_admissible(cfg.rho, pe);
      } catch (const std::invalid_argument& e) {
        r.invalid("sweep.eps", e.what());
      }
    }
    if (!std::is_sorted(cfg.eps_values.begin(), cfg.eps_values.end(), std::greater_equal<>()))
      r.invalid("sweep.eps", "sweep.eps must be descending");
    if (!(cfg.L_ref > 0.0)) r.invalid("sweep.L_ref", "sweep.L_ref must be positive");
  }
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Solve: return "solve";
    case Mode::SweepMu: return "sweep_mu";
    case Mode::SweepEps: return "sweep_eps";
    case Mode::Diagnose: return "diagnose";
    case Mode::Oracle: return "oracle";
    case Mode::Sobolev: return "sobolev";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : {Mode::Solve, Mode::SweepMu, Mode::SweepEps, Mode::Diagnose, Mode::Oracle, Mode::Sobolev})
    if (s == mode_name(m)) return m;
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors, "\n")), errors_(std::move(errors)) {}

ExperimentConfig parse_config(std::string_view text, std::optional<Mode> mode) {
  Reader r;
  r.parse(text);
  ExperimentConfig cfg;

  if (r.has("mode")) {
    const auto m = parse_mode(r.entries.at("mode").value);
    if (!m) r.bad("mode", "one of solve, sweep_mu, sweep_eps, diagnose, oracle, sobolev");
    else if (mode && *m != *mode)
      r.invalid("mode", fmt::format("config mode '{}' conflicts with requested mode '{}'", mode_name(*m), mode_name(*mode)));
    else cfg.mode = *m;
  } else if (mode) {
    cfg.mode = *mode;
  }

  long long n = cfg.n;
  r.integer("grid.n", n);
  if (n > 512) r.invalid("grid.n", fmt::format("grid.n = {} exceeds 512", n));
  cfg.n = static_cast<int>(std::clamp<long long>(n, 0, 512));
  r.number("grid.L", cfg.L);
  r.vec3("grid.center", cfg.center);
  try {
    make_grid(cfg.n, cfg.L, cfg.center);
  } catch (const std::invalid_argument& e) {
    r.invalid(r.has("grid.n") ? "grid.n" : "grid.L", fmt::format("grid: {}", e.what()));
  }

  ChargeVariant variant = ChargeVariant::Constant;
  if (r.has("rho.variant")) {
    const std::string& v = r.entries.at("rho.variant").value;
    bool found = false;
    for (ChargeVariant c : {ChargeVariant::Constant, ChargeVariant::CoercivePower, ChargeVariant::BumpedConstant,
                            ChargeVariant::ExpCoercive})
      if (v == variant_name(c)) {
        variant = c;
        found = true;
      }
    if (!found) r.bad("rho.variant", "one of constant, coercive_power, bumped_constant, exp_coercive");
  }
  const auto applies = variant_keys(variant);
  for (const char* k : {"rho0", "s", "a", "sigma", "xb", "beta", "alpha", "k"})
    if (r.has(fmt::format("rho.{}", k)) && std::find(applies.begin(), applies.end(), k) == applies.end())
      r.invalid(fmt::format("rho.{}", k), fmt::format("rho.{} does not apply to variant {}", k, variant_name(variant)));
  double rho0 = 1.0, s = 2.0, a = 0.5, sigma = 1.0, beta = 0.5, alpha = 1.0, k = 0.0;
  Vec3 xb{0.0, 0.0, 0.0};
  r.number("rho.rho0", rho0);
  r.number("rho.s", s);
  r.number("rho.a", a);
  r.number("rho.sigma", sigma);
  r.vec3("rho.xb", xb);
  r.number("rho.beta", beta);
  r.number("rho.alpha", alpha);
  r.number("rho.k", k);
  try {
    switch (variant) {
      case ChargeVariant::Constant: cfg.rho = make_constant(rho0, k); break;
      case ChargeVariant::CoercivePower: cfg.rho = make_coercive_power(rho0, s, k); break;
      case ChargeVariant::BumpedConstant: cfg.rho = make_bumped_constant(rho0, a, sigma, xb, k); break;
      case ChargeVariant::ExpCoercive: cfg.rho = make_exp_coercive(rho0, beta, alpha, k); break;
    }
  } catch (const std::invalid_argument& e) {
    r.invalid("rho.variant", fmt::format("rho: {}", e.what()));
  }

  r.number("params.p", cfg.params.p);
  r.number("params.mu", cfg.params.mu);
  r.number("params.lambda", cfg.params.lambda);
  r.number("params.eps", cfg.params.eps);
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    r.invalid("params.p", fmt::format("params: {}", e.what()));
  }

  r.number("solver.tol", cfg.tol);
  if (!(cfg.tol > 0.0)) r.invalid("solver.tol", "solver.tol must be positive");
  long long max_iter = cfg.max_iter;
  r.integer("solver.max_iter", max_iter);
  if (max_iter < 1 || max_iter > 100000000) r.invalid("solver.max_iter", "solver.max_iter must lie in [1, 1e8]");
  cfg.max_iter = static_cast<int>(std::clamp<long long>(max_iter, 1, 100000000));
  if (r.has("solver.method")) {
    const std::string& m = r.entries.at("solver.method").value;
    if (m == "auto") cfg.method = SolveMethod::Auto;
    else if (m == "mountain_pass") cfg.method = SolveMethod::MountainPass;
    else if (m == "nehari") cfg.method = SolveMethod::Nehari;
    else r.bad("solver.method", "one of auto, mountain_pass, nehari");
  }
  r.number("solver.seed_amplitude", cfg.seed.amplitude);
  if (!(cfg.seed.amplitude >= 0.0)) r.invalid("solver.seed_amplitude", "solver.seed_amplitude must be >= 0");
  r.number("solver.seed_width", cfg.seed.width);
  if (!(cfg.seed.width > 0.0)) r.invalid("solver.seed_width", "solver.seed_width must be positive");
  r.vec3("solver.seed_center", cfg.seed.center);

  r.list("sweep.mu", cfg.mu_values);
  r.list("sweep.eps", cfg.eps_values);
  r.number("sweep.L_ref", cfg.L_ref);
  r.boolean("sweep.parallel", cfg.parallel);

  if (r.has("rng.seed")) {
    const std::string& sv = r.entries.at("rng.seed").value;
    std::uint64_t seed = 0;
    const auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), seed);
    if (ec != std::errc() || p != sv.data() + sv.size()) r.bad("rng.seed", "a nonnegative integer");
    else cfg.rng_seed = seed;
  }
  if (r.has("output.directory")) cfg.out_dir = r.entries.at("output.directory").value;
  if (r.has("output.formats")) {
    cfg.write_csv = cfg.write_json = false;
    std::stringstream ss(r.entries.at("output.formats").value);
    bool ok = true;
    for (std::string f; std::getline(ss, f, ',');) {
      f = trim(f);
      if (f == "csv") cfg.write_csv = true;
      else if (f == "json") cfg.write_json = true;
      else ok = false;
    }
    if (!ok || !(cfg.write_csv || cfg.write_json)) r.bad("output.formats", "a nonempty subset of csv, json");
  }

  check_modes(r, cfg);
  if (!r.errors.empty()) throw ConfigError(r.errors);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<Mode> mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError({fmt::format("cannot read config file '{}'", path)});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), mode);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  auto vec = [](const Vec3& v) { return fmt::format("{}, {}, {}", exact_str(v[0]), exact_str(v[1]), exact_str(v[2])); };
  auto lst = [](const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(exact_str(x));
    return join(parts, ", ");
  };
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
  put("mode", mode_name(cfg.mode));
  put("grid.n", std::to_string(cfg.n));
  put("grid.L", exact_str(cfg.L));
  put("grid.center", vec(cfg.center));
  const ChargeDensity& cd = cfg.rho;
  put("rho.variant", variant_name(cd.variant));
  for (const std::string& k : variant_keys(cd.variant)) {
    const std::string key = "rho." + k;
    if (k == "rho0") put(key, exact_str(cd.rho0));
    else if (k == "s") put(key, exact_str(cd.s));
    else if (k == "a") put(key, exact_str(cd.a));
    else if (k == "sigma") put(key, exact_str(cd.sigma));
    else if (k == "xb") put(key, vec(cd.xb));
    else if (k == "beta") put(key, exact_str(cd.beta));
    else if (k == "alpha") put(key, exact_str(cd.alpha));
    else if (k == "k") put(key, exact_str(cd.k));
  }
  put("params.p", exact_str(cfg.params.p));
  put("params.mu", exact_str(cfg.params.mu));
  put("params.lambda", exact_str(cfg.params.lambda));
  put("params.eps", exact_str(cfg.params.eps));
  put("solver.tol", exact_str(cfg.tol));
  put("solver.max_iter", std::to_string(cfg.max_iter));
  put("solver.method", method_name(cfg.method));
  put("solver.seed_amplitude", exact_str(cfg.seed.amplitude));
  put("solver.seed_width", exact_str(cfg.seed.width));
  put("solver.seed_center", vec(cfg.seed.center));
  if (!cfg.mu_values.empty()) put("sweep.mu", lst(cfg.mu_values));
  if (!cfg.eps_values.empty()) put("sweep.eps", lst(cfg.eps_values));
  put("sweep.L_ref", exact_str(cfg.L_ref));
  put("sweep.parallel", cfg.parallel ? "true" : "false");
  put("rng.seed", std::to_string(cfg.rng_seed));
  put("output.directory", cfg.out_dir);
  std::vector<std::string> formats;
  if (cfg.write_csv) formats.push_back("csv");
  if (cfg.write_json) formats.push_back("json");
  put("output.formats", join(formats, ", "));
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("SPVAR_THREADS")) {
    int v = 0;
    const std::string_view s(env);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- running

namespace {

// Flat JSON object with insertion-ordered keys and 17-digit floats.
class FlatJson {
 public:
  void num(const std::string& key, double v) { items_.emplace_back(key, number(v)); }
  void integer(const std::string& key, long long v) { items_.emplace_back(key, std::to_string(v)); }
  void boolean(const std::string& key, bool v) { items_.emplace_back(key, v ? "true" : "false"); }
  void str(const std::string& key, const std::string& v) { items_.emplace_back(key, quote(v)); }
  void vec(const std::string& key, const Vec3& v) { nums(key, {v[0], v[1], v[2]}); }
  void nums(const std::string& key, const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(number(x));
    items_.emplace_back(key, "[" + join(parts, ", ") + "]");
  }
  void strs(const std::string& key, const std::vector<std::string>& v) {
    std::vector<std::string> parts;
    for (const auto& x : v) parts.push_back(quote(x));
    items_.emplace_back(key, "[" + join(parts, ", ") + "]");
  }
  std::string dump() const {
    std::string out = "{\n";
    for (std::size_t i = 0; i < items_.size(); ++i)
      out += fmt::format("  {}: {}{}\n", quote(items_[i].first), items_[i].second, i + 1 < items_.size() ? "," : "");
    return out + "}\n";
  }

 private:
  static std::string number(double v) { return std::isfinite(v) ? exact_str(v) : "null"; }
  static std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += {'\\', c};
      else if (static_cast<unsigned char>(c) < 0x20) out += fmt::format("\\u{:04x}", static_cast<int>(c));
      else out += c;
    }
    return out + "\"";
  }
  std::vector<std::pair<std::string, std::string>> items_;
};

class Run {
 public:
  explicit Run(const ExperimentConfig& cfg) : cfg_(cfg), dir_(cfg.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));
  }

  void fail(const std::string& what) { out.failures.push_back(what); }
  void require(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }

  void write(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out.artifacts.push_back(path.string());
  }
  void json(const std::string& name, const FlatJson& j) {
    if (cfg_.write_json) write(name, j.dump());
  }
  void csv(const std::string& name, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    if (!cfg_.write_csv) return;
    std::string text = join(header, ",") + "\n";
    for (const auto& row : rows) {
      std::vector<std::string> cells;
      for (double v : row) cells.push_back(exact_str(v));
      text += join(cells, ",") + "\n";
    }
    write(name, text);
  }

  Grid grid() const { return make_grid(cfg_.n, cfg_.L, cfg_.center); }
  SolverOptions solver() const {
    SolverOptions o;
    o.tol = cfg_.tol;
    o.max_iter = cfg_.max_iter;
    return o;
  }
  ScalarField seed(const Grid& g, const ProblemParams& pp) const {
    const double amp = cfg_.seed.amplitude > 0.0 ? cfg_.seed.amplitude : 2.0 * peak_lower_bound(pp);
    return gaussian_seed(g, cfg_.seed.center, amp, cfg_.seed.width);
  }

  SolutionRecord solve(const ProblemParams& pp) const {
    const Grid g = grid();
    const bool nehari = cfg_.method == SolveMethod::Nehari || (cfg_.method == SolveMethod::Auto && pp.p > 3.0);
    return nehari ? ground_state_nehari(cfg_.rho, pp, seed(g, pp), solver())
                  : mountain_pass_solve(cfg_.rho, pp, seed(g, pp), solver());
  }

  // Summary keys for a record under `prefix`, plus its hard invariants.
  void record(FlatJson& j, const std::string& prefix, const SolutionRecord& rec) {
    const ProblemParams& pp = rec.params;
    j.str(prefix + "rho", rec.rho_tag);
    j.num(prefix + "p", pp.p);
    j.num(prefix + "mu", pp.mu);
    j.num(prefix + "lambda", pp.lambda);
    j.num(prefix + "eps", pp.eps);
    j.integer(prefix + "grid_n", rec.u.grid().n());
    j.num(prefix + "grid_half_width", rec.u.grid().half_width());
    j.vec(prefix + "grid_center", rec.u.grid().center());
    j.boolean(prefix + "converged", rec.converged);
    j.str(prefix + "status", rec.status);
    j.integer(prefix + "iterations", rec.iterations);
    j.num(prefix + "energy", rec.energy.total);
    j.num(prefix + "energy_kinetic", rec.energy.kinetic);
    j.num(prefix + "energy_coulomb_quarter", rec.energy.coulomb_quarter);
    j.num(prefix + "energy_potential", rec.energy.potential);
    j.num(prefix + "e_norm", rec.energy.e_norm);
    j.num(prefix + "grad_sq", rec.integrals.grad_sq);
    j.num(prefix + "mass", rec.integrals.mass);
    j.num(prefix + "coulomb", rec.integrals.coulomb);
    j.num(prefix + "power", rec.integrals.power);
    j.num(prefix + "residual_l2", rec.residual_l2);
    j.num(prefix + "nehari_residual", rec.nehari_residual);
    j.num(prefix + "pohozaev_residual", rec.pohozaev_residual);
    j.num(prefix + "pohozaev_kinetic", rec.pohozaev_kinetic);
    j.boolean(prefix + "pohozaev_reliable", rec.pohozaev_reliable);
    j.num(prefix + "h1_norm_sq", rec.h1_norm_sq);
    j.num(prefix + "u_max", rec.u.max());
    j.num(prefix + "u_min", rec.u.min());
    j.vec(prefix + "peak", interpolated_peak(rec.u));
    j.num(prefix + "path_upper_bound", rec.path_upper_bound);
    j.num(prefix + "path_gap", rec.path_gap);

    const std::string label = prefix.empty() ? "record" : prefix.substr(0, prefix.size() - 1);
    const std::string tag = fmt::format("{} (p={}, mu={}, eps={})", label, pp.p, pp.mu, pp.eps);
    require(rec.converged, tag + ": " + (rec.status.empty() ? std::string("not converged") : rec.status));
    if (!rec.converged) return;
    require(rec.residual_l2 < cfg_.tol, tag + ": residual above tolerance");
    require(rec.u.max() >= peak_lower_bound(pp) - 1e-10, tag + ": peak below (lambda/mu)^{1/(p-1)}");
    if (rec.pohozaev_reliable)
      require(std::abs(rec.pohozaev_residual) < 1e-2 * rec.pohozaev_kinetic, tag + ": Pohozaev residual above 1e-2 kinetic");
  }

  void profile_cut(const SolutionRecord& rec, const std::string& name) {
    const Grid& g = rec.u.grid();
    const int n = g.n(), mid = n / 2;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = g.index(i, mid, mid);
      rows.push_back({g.coord(i, 0), rec.u[idx], rec.phi[idx]});
    }
    csv(name, {"x", "u", "phi"}, rows);
  }

  void radial_golden(const ProblemParams& pp) {
    const double rho_inf = cfg_.rho.rho_inf();
    if (!std::isfinite(rho_inf)) return;
    const RadialProfile prof = radial_limit_ground_state(pp, rho_inf);
    const auto path = dir_ / "radial_profile.txt";
    write_radial_table(prof, path.string());
    out.artifacts.push_back(path.string());
  }

  void run_solve(bool diagnose) {
    const SolutionRecord rec = solve(cfg_.params);
    FlatJson j;
    j.str("mode", mode_name(cfg_.mode));
    record(j, "", rec);
    json("solution.json", j);
    profile_cut(rec, "profile_x.csv");
    radial_golden(cfg_.params);
    if (diagnose) diagnostics(rec);
  }

  void diagnostics(const SolutionRecord& rec) {
    const ProblemParams& pp = rec.params;
    const double k = cfg_.rho.k;
    FlatJson j;
    const TripleIdentity ti = check_triple_consistency(rec, k);
    const double scale = std::max({ti.alpha, ti.gamma, ti.delta});
    j.num("alpha", ti.alpha);
    j.num("gamma", ti.gamma);
    j.num("delta", ti.delta);
    j.num("c", ti.c);
    j.num("k", ti.k);
    j.num("p", ti.p);
    j.num("residual_energy", ti.residual_energy);
    j.num("residual_nehari", ti.residual_nehari);
    j.num("slack_pohozaev", ti.slack_pohozaev);
    j.boolean("bounds_applicable", ti.bounds_applicable);
    if (ti.bounds_applicable) {
      j.num("delta_max", ti.bounds.delta_max);
      j.num("gamma_max", ti.bounds.gamma_max);
      j.boolean("bounds_ok", ti.bounds_ok);
    }
    const KConditionResult kc = verify_k_condition(cfg_.rho, rec.u.grid());
    j.boolean("k_condition_holds", kc.holds);
    j.num("k_condition_margin", kc.worst_margin);
    if (rec.converged) {
      require(ti.residual_energy < 1e-6 * scale, "diagnostics: energy relation residual above 1e-6");
      require(ti.residual_nehari < 1e-6 * scale, "diagnostics: Nehari relation residual above 1e-6");
      if (kc.holds && ti.bounds_applicable) {
        require(ti.slack_pohozaev >= -1e-6 * scale, "diagnostics: Pohozaev inequality slack below -1e-6");
        require(ti.bounds_ok, "diagnostics: measured delta or gamma exceeds its closed-form bound");
      }
    }

    // Sobolev constant on a fixed box around the origin, independent of the solve grid.
    const SobolevEstimate se = sobolev_estimate(make_grid(std::min(cfg_.n, 32), 6.0), pp.p);
    j.num("sobolev_S_hat", se.S_hat);
    j.str("sobolev_method", se.method);
    try {
      const double C = lower_bound_C(k, pp.p, se);
      j.num("lower_bound_C", C);
      j.boolean("energy_above_lower_bound", ti.c >= C);
      if (rec.converged && cfg_.rho.coercive()) require(ti.c >= C, "diagnostics: energy below the lower bound C(k, p)");
    } catch (const std::invalid_argument& e) {
      j.str("lower_bound_C_error", e.what());
    }

    try {
      const DecayFit df = decay_fit(rec.u, cfg_.rho);
      j.num("decay_gamma_fit", df.gamma_fit);
      j.num("decay_alpha_fit", df.alpha_fit);
      j.num("decay_stretch_coefficient", df.stretch_coefficient);
      j.boolean("decay_inequality_ok", df.inequality_ok);
      j.num("decay_shell_inner", df.shell_inner);
      j.num("decay_shell_outer", df.shell_outer);
    } catch (const std::exception& e) {
      j.str("decay_fit_error", e.what());
    }
    json("diagnostics.json", j);
  }

  void run_sweep_mu() {
    const Grid g = grid();
    const ContinuationResult cr = mu_continuation(cfg_.rho, cfg_.params, cfg_.mu_values, seed(g, cfg_.params), solver());
    std::vector<std::vector<double>> rows;
    FlatJson j;
    j.str("mode", "sweep_mu");
    j.boolean("complete", cr.complete);
    j.boolean("monotone_ok", cr.monotone_ok);
    j.nums("mu", cr.mu_values);
    j.nums("c", cr.c_values);
    for (std::size_t i = 0; i < cr.records.size(); ++i) {
      const SolutionRecord& r = cr.records[i];
      rows.push_back({cr.mu_values[i], cr.c_values[i], r.residual_l2, r.converged ? 1.0 : 0.0});
      record(j, fmt::format("records.{}.", i), r);
    }
    csv("sweep_mu.csv", {"mu", "c", "residual_l2", "converged"}, rows);
    json("sweep_mu.json", j);
    require(cr.monotone_ok, "sweep_mu: energies not non-increasing in mu");
  }

  void run_sweep_eps() {
    SweepOptions so;
    so.n = cfg_.n;
    so.L_ref = cfg_.L_ref;
    so.seed_center = cfg_.seed.center;
    so.solver = solver();
    so.independent_seeds = cfg_.parallel;
    so.workers = worker_count();
    const SweepResult sr = semiclassical_sweep(cfg_.rho, cfg_.params, cfg_.eps_values, so);
    std::vector<std::vector<double>> rows;
    FlatJson j;
    j.str("mode", "sweep_eps");
    j.boolean("complete", sr.complete);
    const double nan = std::nan("");
    std::size_t ri = 0;
    for (std::size_t i = 0; i < sr.records.size(); ++i) {
      const SolutionRecord& r = sr.records[i];
      const std::string prefix = fmt::format("records.{}.", i);
      record(j, prefix, r);
      if (!r.converged) {
        rows.push_back({r.params.eps, nan, nan, nan, nan, nan, nan, nan, 0.0});
        continue;
      }
      const ConcentrationReport& c = sr.reports[ri++];
      rows.push_back({c.eps, c.x_peak[0], c.x_peak[1], c.x_peak[2], c.peak_value, norm(c.grad_rho_at_peak),
                      norm(c.claim3_integral), c.rescaled_profile_distance, 1.0});
      j.vec(prefix + "x_peak", c.x_peak);
      j.vec(prefix + "grad_rho_at_peak", c.grad_rho_at_peak);
      j.vec(prefix + "rho_grad_product", c.rho_grad_product);
      j.vec(prefix + "claim3_integral", c.claim3_integral);
      j.num(prefix + "claim3_ratio", c.claim3_ratio);
      j.boolean(prefix + "peak_bound_ok", c.peak_bound_ok);
      j.num(prefix + "rescaled_profile_distance", c.rescaled_profile_distance);
      j.num(prefix + "kwong_residual", c.kwong_residual);
      j.num(prefix + "mass_radius_99", c.mass_radius_99);
      j.boolean(prefix + "decay_barrier_ok", c.decay_barrier_ok);
      require(c.peak_bound_ok, fmt::format("sweep_eps: peak bound fails at eps = {}", c.eps));
    }
    std::vector<SolutionRecord> converged;
    for (const SolutionRecord& r : sr.records)
      if (r.converged) converged.push_back(r);
    if (converged.size() >= 3) {
      const UniformBound ub = uniform_bound_probe(converged);
      j.num("sup_linf", ub.sup_linf);
      j.boolean("gidas_spruck_flag", ub.gidas_spruck_flag);
      j.num("mann_kendall_z", ub.mann_kendall_z);
    }
    csv("sweep_eps.csv",
        {"eps", "peak_x1", "peak_x2", "peak_x3", "peak_value", "grad_rho_norm", "claim3_norm", "profile_distance",
         "converged"},
        rows);
    json("sweep_eps.json", j);
    require(sr.records.size() == cfg_.eps_values.size(), "sweep_eps: stopped early");
  }

  void run_oracle() {
    std::mt19937_64 rng(cfg_.rng_seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const Grid g = make_grid(8, cfg_.L, cfg_.center);
    FlatJson j;
    j.str("mode", "oracle");

    std::vector<double> poisson_err;
    for (int t = 0; t < 20; ++t) {
      ScalarField q = ScalarField::sample(g, [&](const Vec3&) { return uni(rng); });
      const ScalarField a = poisson_fft(q), b = poisson_direct(q);
      poisson_err.push_back((a - b).max_abs() / b.max_abs());
    }
    const double pmax = *std::max_element(poisson_err.begin(), poisson_err.end());
    j.nums("poisson_rel_err", poisson_err);
    j.num("poisson_max_rel_err", pmax);
    j.boolean("poisson_pass", pmax < 1e-10);
    require(pmax < 1e-10, "oracle: poisson_fft differs from poisson_direct by more than 1e-10");

    // Directional derivatives of I against first_variation, on positive smooth u.
    auto bumps = [&](double base) {
      std::vector<std::array<double, 5>> b(3);
      for (auto& x : b) x = {base + 0.5 * (uni(rng) + 1.0), 0.5 * cfg_.L * uni(rng), 0.5 * cfg_.L * uni(rng),
                             0.5 * cfg_.L * uni(rng), 0.3 * cfg_.L * (1.5 + 0.5 * uni(rng))};
      return ScalarField::sample(g, [b, &g](const Vec3& x) {
        double s = 0.0;
        for (const auto& c : b) {
          const Vec3 d = x - (g.center() + Vec3{c[1], c[2], c[3]});
          s += c[0] * std::exp(-dot(d, d) / (c[4] * c[4]));
        }
        return s;
      });
    };
    std::vector<double> grad_err;
    const double t = 1e-4;
    for (int trial = 0; trial < 20; ++trial) {
      const ScalarField u = bumps(0.5), v = bumps(-0.5);
      const double fd = (energy(u + t * v, cfg_.rho, cfg_.params).total - energy(u - t * v, cfg_.rho, cfg_.params).total) /
                        (2.0 * t);
      const double an = inner(first_variation(u, cfg_.rho, cfg_.params), v);
      grad_err.push_back(std::abs(fd - an) / std::abs(an));
    }
    const double gmax = *std::max_element(grad_err.begin(), grad_err.end());
    j.nums("gradient_rel_err", grad_err);
    j.num("gradient_max_rel_err", gmax);
    j.boolean("gradient_pass", gmax < 1e-5);
    require(gmax < 1e-5, "oracle: finite-difference gradient check above 1e-5");
    json("oracle.json", j);
  }

  void run_sobolev() {
    const SobolevEstimate se = sobolev_estimate(grid(), cfg_.params.p);
    FlatJson j;
    j.str("mode", "sobolev");
    j.num("p", se.p);
    j.num("S_hat", se.S_hat);
    j.str("method", se.method);
    j.integer("iterations", se.iterations);
    if (cfg_.params.p > 2.0 && cfg_.params.p < 5.0) {
      try {
        j.num("lower_bound_coefficient", lower_bound_coefficient(cfg_.rho.k, cfg_.params.p));
        j.num("lower_bound_C", lower_bound_C(cfg_.rho.k, cfg_.params.p, se));
      } catch (const std::invalid_argument& e) {
        j.str("lower_bound_error", e.what());
      }
    }
    json("sobolev.json", j);
    require(se.S_hat > 0.0, "sobolev: nonpositive estimate");
  }

  RunOutcome out;

 private:
  const ExperimentConfig& cfg_;
  std::filesystem::path dir_;
};

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  Run run(cfg);
  try {
    switch (cfg.mode) {
      case Mode::Solve: run.run_solve(false); break;
      case Mode::Diagnose: run.run_solve(true); break;
      case Mode::SweepMu: run.run_sweep_mu(); break;
      case Mode::SweepEps: run.run_sweep_eps(); break;
      case Mode::Oracle: run.run_oracle(); break;
      case Mode::Sobolev: run.run_sobolev(); break;
    }
  } catch (const std::exception& e) {
    run.fail(fmt::format("{}: {}", mode_name(cfg.mode), e.what()));
  }
  if (!run.out.failures.empty()) {
    FlatJson j;
    j.str("mode", mode_name(cfg.mode));
    j.strs("failures", run.out.failures);
    run.write("failures.json", j.dump());
  }
  run.out.exit_status = run.out.failures.empty() ? 0 : 1;
  return std::move(run.out);
}

}  // namespace spvar
