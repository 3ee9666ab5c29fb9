#pragma once
// Plain-text experiment configuration: `key = value` lines under `[section]`
// headers, parsed into an ExperimentConfig that drives the command-line
// front-end.  Unknown sections or keys are errors so typos cannot silently
// fall back to defaults.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaoskit/assumptions.hpp"

namespace chaoskit {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using IniData = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace detail

/// Parse `[section]` / `key = value` text.  `#` and `;` start comments; blank
/// lines are skipped; later duplicates of a key override earlier ones.
inline IniData parse_ini(std::istream& in) {
  IniData data;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      data[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key before any [section]");
    data[section][key] = value;
  }
  return data;
}

inline IniData parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_ini(in);
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + v);
  }
  if (used != v.size()) throw ConfigError("config key '" + key + "': trailing junk: " + v);
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + v);
  }
  if (used != v.size()) throw ConfigError("config key '" + key + "': trailing junk: " + v);
  return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: " + v);
  }
  if (used != v.size()) throw ConfigError("config key '" + key + "': trailing junk: " + v);
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: " + v);
}

inline std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : parse_list(v)) out.push_back(parse_double(key, item));
  return out;
}

}  // namespace detail

/// Everything a single run of the front-end needs.  Thread count and output
/// location are execution details: they are settable here but never echoed
/// into reports, so reports stay byte-identical across parallelism degrees.
struct ExperimentConfig {
  // family
  std::string family = "FD";
  int levels = 6;
  double theta = 1.5;
  double hurst = 0.85;
  int panels = 32;
  std::string family_file;  // CUSTOM: path to a kernel-node JSON file

  // run
  int m = 64;
  int samples = 1000;
  std::uint64_t seed = 1;
  int threads = 1;

  // assumption checks
  AssumptionOptions assumptions;

  // verification suites
  std::vector<std::string> suites = {"interpolation", "energy",       "corollary", "uniform",
                                     "nonvanishing",  "subspace",     "density",   "norris"};
  std::vector<std::string> integrands = {"t"};
  double nu = 0.8;
  std::vector<double> epsilons = {0.5, 0.25, 0.125, 0.0625};
  std::vector<double> deltas;  // density windows; empty = automatic

  // SDE experiment
  std::string fields = "elliptic-sine";
  double amp = 0.1;
  int sde_dim = 2;
  double sde_t = 1.0;
  std::vector<double> y0;  // empty = origin

  // output
  std::string out_dir = ".";
  bool svg = false;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.m < 2 || (cfg.m & (cfg.m - 1)) != 0)
    throw ConfigError("run.m must be a power of two >= 2");
  if (cfg.samples < 1) throw ConfigError("run.samples must be >= 1");
  if (cfg.threads < 1) throw ConfigError("run.threads must be >= 1");
  if (!(cfg.assumptions.theta_margin > 0.0))
    throw ConfigError("assumptions.theta_margin must be positive");
  if (!(cfg.assumptions.rank_tol > 0.0)) throw ConfigError("assumptions.rank_tol must be positive");
  if (cfg.assumptions.alpha_depth < 1 || cfg.assumptions.alpha_depth > 8)
    throw ConfigError("assumptions.depth must lie in 1..8");
  if (cfg.assumptions.n_random_configs < 0)
    throw ConfigError("assumptions.random_configs must be >= 0");
  if (!(cfg.nu > 0.0 && cfg.nu < 1.0)) throw ConfigError("verify.nu must lie in (0,1)");
  if (cfg.epsilons.empty()) throw ConfigError("verify.epsilons must be nonempty");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (!(cfg.epsilons[i] > 0.0 && cfg.epsilons[i] <= 0.5))
      throw ConfigError("verify.epsilons must lie in (0, 1/2]");
    if (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))
      throw ConfigError("verify.epsilons must decrease");
  }
  for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
    if (!(cfg.deltas[i] > 0.0)) throw ConfigError("verify.deltas must be positive");
    if (i > 0 && !(cfg.deltas[i] < cfg.deltas[i - 1]))
      throw ConfigError("verify.deltas must decrease");
  }
  if (!(cfg.amp >= 0.0 && cfg.amp < 1.0)) throw ConfigError("sde.amp must lie in [0,1)");
  if (cfg.sde_dim < 1) throw ConfigError("sde.dim must be >= 1");
  if (!(cfg.sde_t > 0.0 && cfg.sde_t <= 1.0)) throw ConfigError("sde.t must lie in (0,1]");
  if (!cfg.y0.empty() && static_cast<int>(cfg.y0.size()) != cfg.sde_dim)
    throw ConfigError("sde.y0 must have sde.dim entries");
  if (cfg.family.empty()) throw ConfigError("family.name must be set");
}

/// Build an ExperimentConfig from parsed INI data; unknown sections or keys
/// raise ConfigError.
inline ExperimentConfig experiment_from_ini(const IniData& data) {
  ExperimentConfig cfg;
  for (const auto& [section, kv] : data) {
    for (const auto& [key, value] : kv) {
      const std::string where = section + "." + key;
      if (section == "family") {
        if (key == "name")
          cfg.family = value;
        else if (key == "levels")
          cfg.levels = static_cast<int>(detail::parse_int(where, value));
        else if (key == "theta")
          cfg.theta = detail::parse_double(where, value);
        else if (key == "hurst")
          cfg.hurst = detail::parse_double(where, value);
        else if (key == "panels")
          cfg.panels = static_cast<int>(detail::parse_int(where, value));
        else if (key == "file")
          cfg.family_file = value;
        else
          throw ConfigError("unknown config key: " + where);
      } else if (section == "run") {
        if (key == "m")
          cfg.m = static_cast<int>(detail::parse_int(where, value));
        else if (key == "samples")
          cfg.samples = static_cast<int>(detail::parse_int(where, value));
        else if (key == "seed")
          cfg.seed = detail::parse_u64(where, value);
        else if (key == "threads")
          cfg.threads = static_cast<int>(detail::parse_int(where, value));
        else
          throw ConfigError("unknown config key: " + where);
      } else if (section == "assumptions") {
        if (key == "regularity_m")
          cfg.assumptions.regularity_m = static_cast<int>(detail::parse_int(where, value));
        else if (key == "theta_margin")
          cfg.assumptions.theta_margin = detail::parse_double(where, value);
        else if (key == "depth")
          cfg.assumptions.alpha_depth = static_cast<int>(detail::parse_int(where, value));
        else if (key == "random_configs")
          cfg.assumptions.n_random_configs = static_cast<int>(detail::parse_int(where, value));
        else if (key == "rowsum_m")
          cfg.assumptions.rowsum_m = static_cast<int>(detail::parse_int(where, value));
        else
          throw ConfigError("unknown config key: " + where);
      } else if (section == "verify") {
        if (key == "suites")
          cfg.suites = detail::parse_list(value);
        else if (key == "integrands")
          cfg.integrands = detail::parse_list(value);
        else if (key == "nu")
          cfg.nu = detail::parse_double(where, value);
        else if (key == "epsilons")
          cfg.epsilons = detail::parse_double_list(where, value);
        else if (key == "deltas")
          cfg.deltas = detail::parse_double_list(where, value);
        else
          throw ConfigError("unknown config key: " + where);
      } else if (section == "sde") {
        if (key == "fields")
          cfg.fields = value;
        else if (key == "amp")
          cfg.amp = detail::parse_double(where, value);
        else if (key == "dim")
          cfg.sde_dim = static_cast<int>(detail::parse_int(where, value));
        else if (key == "t")
          cfg.sde_t = detail::parse_double(where, value);
        else if (key == "y0")
          cfg.y0 = detail::parse_double_list(where, value);
        else
          throw ConfigError("unknown config key: " + where);
      } else if (section == "output") {
        if (key == "dir")
          cfg.out_dir = value;
        else if (key == "svg")
          cfg.svg = detail::parse_bool(where, value);
        else
          throw ConfigError("unknown config key: " + where);
      } else {
        throw ConfigError("unknown config section: [" + section + "]");
      }
    }
  }
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_from_ini(parse_ini_file(path));
}

}  // namespace chaoskit
