#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "torsionlab/torsionlab.hpp"

namespace torsionlab::cli {

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"torsion", "linking",  "locate",     "twist-sweep",
                                              "crovisier", "measure", "torus-null", "wgrid"};
  return names;
}

/// Bad configuration: unknown command, malformed value, failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  SystemSpec system{"standard_map", {}, ""};

  int n = 1;
  std::optional<int> n_max;
  std::vector<int> n_list;

  Vec2 point{0.0, 0.0};
  Vec2 vector{0.0, 1.0};
  Vec2 field{1.0, 0.0};
  Vec2 x{0.0, 0.0};
  Vec2 y{0.0, 1.0};

  int scan = 64;
  double tol = 1e-8;
  int steps_per_unit = 64;
  std::uint64_t seed = 0;
  int jobs = 1;

  /// Random sample size for sweeps.
  int points = 100;
  int s_count = 64;
  std::vector<double> t_values{0.0, 0.25, 0.5, 1.0};

  std::string format = "json";
  std::string out;

  RefinementPolicy policy() const {
    RefinementPolicy p;
    p.steps_per_unit = steps_per_unit;
    return p;
  }
  ScanOptions scan_options() const { return {scan, tol, ScanOptions{}.max_refinements, jobs}; }
  /// Horizons for sweeps: --n-list if given, else --n.
  std::vector<int> horizons() const { return n_list.empty() ? std::vector<int>{n} : n_list; }
};

// ---------------------------------------------------------------------------
// Scalar parsing shared by flags and config files
// ---------------------------------------------------------------------------

inline double parse_real(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(field + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw ConfigError(field + ": '" + text + "' is not a number");
  return v;
}

inline Vec2 parse_vec2(const std::string& text, const std::string& field) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
    throw ConfigError(field + ": expected X,Y but got '" + text + "'");
  }
  return {parse_real(text.substr(0, comma), field), parse_real(text.substr(comma + 1), field)};
}

inline std::pair<std::string, double> parse_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--param: expected KEY=VALUE but got '" + text + "'");
  }
  const std::string key = text.substr(0, eq);
  return {key, parse_real(text.substr(eq + 1), "--param " + key)};
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& field) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = parse_real(item, field);
    if constexpr (std::is_integral_v<T>) {
      if (v != static_cast<double>(static_cast<T>(v))) {
        throw ConfigError(field + ": '" + item + "' is not an integer");
      }
    }
    out.push_back(static_cast<T>(v));
  }
  if (out.empty()) throw ConfigError(field + ": empty list");
  return out;
}

// ---------------------------------------------------------------------------
// JSON config files
// ---------------------------------------------------------------------------

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

inline double json_real(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError("config field '" + field + "': expected a number");
  return j.get<double>();
}

inline int json_int(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError("config field '" + field + "': expected an integer");
  return j.get<int>();
}

inline Vec2 json_vec2(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("config field '" + field + "': expected [x, y]");
  }
  return {json_real(j[0], field + "[0]"), json_real(j[1], field + "[1]")};
}

inline std::string json_string(const nlohmann::json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError("config field '" + field + "': expected a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Reads a config object. Unknown keys are rejected so typos surface.
inline RunConfig config_from_json(const nlohmann::json& j, RunConfig cfg = {}) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") {
      cfg.command = json_string(v, key);
    } else if (key == "system") {
      if (!v.is_object()) throw ConfigError("config field 'system': expected an object");
      for (const auto& [sk, sv] : v.items()) {
        if (sk == "name") {
          cfg.system.name = json_string(sv, "system.name");
        } else if (sk == "isotopy") {
          cfg.system.isotopy_variant = json_string(sv, "system.isotopy");
        } else if (sk == "params") {
          if (!sv.is_object()) throw ConfigError("config field 'system.params': expected an object");
          for (const auto& [pk, pv] : sv.items()) {
            cfg.system.params[pk] = json_real(pv, "system.params." + pk);
          }
        } else {
          throw ConfigError("config field 'system." + sk + "': unknown key");
        }
      }
    } else if (key == "n") {
      cfg.n = json_int(v, key);
    } else if (key == "n_max") {
      cfg.n_max = json_int(v, key);
    } else if (key == "n_list") {
      if (!v.is_array()) throw ConfigError("config field 'n_list': expected an array");
      cfg.n_list.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        cfg.n_list.push_back(json_int(v[i], "n_list[" + std::to_string(i) + "]"));
      }
    } else if (key == "point") {
      cfg.point = json_vec2(v, key);
    } else if (key == "vector") {
      cfg.vector = json_vec2(v, key);
    } else if (key == "field") {
      cfg.field = json_vec2(v, key);
    } else if (key == "x") {
      cfg.x = json_vec2(v, key);
    } else if (key == "y") {
      cfg.y = json_vec2(v, key);
    } else if (key == "scan") {
      cfg.scan = json_int(v, key);
    } else if (key == "tol") {
      cfg.tol = json_real(v, key);
    } else if (key == "steps_per_unit") {
      cfg.steps_per_unit = json_int(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("config field 'seed': expected an unsigned integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "jobs") {
      cfg.jobs = json_int(v, key);
    } else if (key == "points") {
      cfg.points = json_int(v, key);
    } else if (key == "s_count") {
      cfg.s_count = json_int(v, key);
    } else if (key == "t_values") {
      if (!v.is_array()) throw ConfigError("config field 't_values': expected an array");
      cfg.t_values.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        cfg.t_values.push_back(json_real(v[i], "t_values[" + std::to_string(i) + "]"));
      }
    } else if (key == "output") {
      if (!v.is_object()) throw ConfigError("config field 'output': expected an object");
      for (const auto& [ok, ov] : v.items()) {
        if (ok == "format") {
          cfg.format = json_string(ov, "output.format");
        } else if (ok == "path") {
          cfg.out = json_string(ov, "output.path");
        } else {
          throw ConfigError("config field 'output." + ok + "': unknown key");
        }
      }
    } else {
      throw ConfigError("config field '" + key + "': unknown key");
    }
  }
  return cfg;
}

inline RunConfig config_from_text(const std::string& text, RunConfig cfg = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: line " + std::to_string(detail::line_of_offset(text, e.byte)) +
                      ": " + e.what());
  }
  return config_from_json(j, std::move(cfg));
}

inline RunConfig config_from_file(const std::string& path, RunConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str(), std::move(cfg));
}

/// Checks everything that does not need running a system.
inline void validate(const RunConfig& cfg) {
  bool known = false;
  for (const auto& c : command_names()) known = known || c == cfg.command;
  if (!known) throw ConfigError("command: unknown command '" + cfg.command + "'");
  if (!register_builtins().contains(cfg.system.name)) {
    throw ConfigError("system: no system named '" + cfg.system.name + "'");
  }
  if (cfg.n < 1) throw ConfigError("n: must be >= 1");
  if (cfg.n_max && *cfg.n_max < 2) throw ConfigError("n_max: must be >= 2");
  for (int n : cfg.n_list) {
    if (n < 1) throw ConfigError("n_list: every horizon must be >= 1");
  }
  if (!(cfg.tol > 0.0)) throw ConfigError("tol: must be > 0");
  if (cfg.scan < 16) throw ConfigError("scan: must be >= 16");
  if (cfg.steps_per_unit < 1) throw ConfigError("steps_per_unit: must be >= 1");
  if (cfg.jobs < 1) throw ConfigError("jobs: must be >= 1");
  if (cfg.points < 1) throw ConfigError("points: must be >= 1");
  if (cfg.s_count < 8 || cfg.s_count % 2 != 0) throw ConfigError("s_count: must be even and >= 8");
  if (cfg.t_values.empty()) throw ConfigError("t_values: must not be empty");
  if (cfg.format != "json" && cfg.format != "csv") {
    throw ConfigError("format: expected json or csv but got '" + cfg.format + "'");
  }
}

}  // namespace torsionlab::cli
