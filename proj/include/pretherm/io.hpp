#pragma once

// Configuration ingestion, built-in presets, and bit-stable CSV/JSON output.

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pretherm/errors.hpp"
#include "pretherm/experiments.hpp"
#include "pretherm/ion_chain.hpp"

namespace pretherm {

inline constexpr const char* kVersion = "0.1.0";

enum class GridKind { linear, log };

/// Everything a CLI run needs besides the subcommand.
struct Settings {
  std::string preset;  // empty for hand-written configs
  TrapConfig trap;
  int reference_n = 16;               // omega_z scaling reference for sweeps
  double reference_omega_z_mhz = 0.6;
  std::vector<int> n_list;            // sweep chain lengths; defaults to {trap.n_ions}
  std::vector<double> mu_grid;        // explicit sweep grid (MHz); empty = default grid
  int mu_points = 40;
  double mu_detuning_min = 1e-5;      // MHz above omega_x
  double mu_detuning_max = std::pow(10.0, 0.5);
  double t_max = kT0;                 // 1/J0
  int grid_points = 201;
  GridKind grid = GridKind::linear;
  double delta = kPhaseDelta;
  double control_alpha = 0.74;
  int control_n = 256;
  int threads = 1;

  /// Base trap for phase-diagram sweeps: the reference chain with its omega_z.
  TrapConfig sweep_base() const {
    TrapConfig b = trap;
    b.n_ions = reference_n;
    b.omega_z_mhz = reference_omega_z_mhz;
    return b;
  }
  std::vector<int> sweep_sizes() const { return n_list.empty() ? std::vector<int>{trap.n_ions} : n_list; }
  std::vector<double> sweep_mu_grid() const {
    return mu_grid.empty() ? default_mu_grid(trap.omega_x_mhz, mu_points, mu_detuning_min, mu_detuning_max) : mu_grid;
  }
  std::vector<double> time_grid() const {
    if (grid == GridKind::linear) return linear_time_grid(t_max, grid_points);
    const double t_min = t_max * 1e-4;
    const double decades = std::log10(t_max / t_min);
    std::vector<double> g(static_cast<std::size_t>(grid_points));
    for (int k = 0; k < grid_points; ++k)
      g[static_cast<std::size_t>(k)] = t_min * std::pow(10.0, decades * k / (grid_points - 1));
    g.back() = t_max;
    return g;
  }

  void validate() const {
    trap.validate();
    if (reference_n < 2) throw ConfigError("reference_n must be >= 2");
    if (!(reference_omega_z_mhz > 0)) throw ConfigError("reference_omega_z_mhz must be > 0");
    for (int n : n_list)
      if (n < 2) throw ConfigError("n_list entries must be >= 2");
    for (double mu : mu_grid)
      if (!(mu > 0)) throw ConfigError("mu_grid entries must be > 0");
    if (mu_points < 2) throw ConfigError("mu_points must be >= 2");
    if (!(mu_detuning_min > 0 && mu_detuning_max > mu_detuning_min))
      throw ConfigError("mu detuning range must satisfy 0 < min < max");
    if (!(t_max > 0)) throw ConfigError("t_max must be > 0");
    if (grid_points < 2) throw ConfigError("grid_points must be >= 2");
    if (!(delta > 0 && delta < 0.5)) throw ConfigError("delta must lie in (0, 0.5)");
    if (!(control_alpha >= 0)) throw ConfigError("control_alpha must be >= 0");
    if (control_n < 4) throw ConfigError("control_n must be >= 4");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

inline std::vector<std::string> preset_names() {
  return {"fig2a", "fig2b", "fig4-n16", "fig4-n64", "fig4-n256", "fig5b", "fig5c"};
}

inline Settings preset(const std::string& name) {
  Settings s;
  s.preset = name;
  const TrapConfig short_range{16, 5.0, 0.1, 5.2, 40.0, 20.0};
  const TrapConfig long_range{16, 5.0, 0.6, 5.02, 3.9, 20.0};
  if (name == "fig2a") {
    s.trap = short_range;
    s.reference_omega_z_mhz = short_range.omega_z_mhz;
  } else if (name == "fig2b") {
    s.trap = long_range;
  } else if (name == "fig4-n16" || name == "fig4-n64" || name == "fig4-n256") {
    const int n = std::stoi(name.substr(6));
    s.trap = config_for_size(long_range, n);
    s.n_list = {n};
  } else if (name == "fig5c") {
    s.trap = config_for_size(long_range, 256);
    s.trap.mu_mhz = 5.0075;
  } else if (name == "fig5b") {
    s.trap = config_for_size(short_range, 256);
    s.trap.mu_mhz = 5.1;
    s.reference_omega_z_mhz = short_range.omega_z_mhz;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON config
// ---------------------------------------------------------------------------

namespace detail {

inline const nlohmann::json& require_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v;
}

inline int json_int(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < -2147483647 || x > 2147483647) throw ConfigError(path + ": integer out of range");
  return static_cast<int>(x);
}

inline double json_double(const nlohmann::json& v, const std::string& path) {
  const double x = require_number(v, path).get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + ": expected a finite number");
  return x;
}

}  // namespace detail

/// Settings from a parsed JSON object. An optional "preset" key selects the
/// starting point; every other key overrides it. Unknown keys are rejected.
inline Settings settings_from_json(const nlohmann::json& j) {
  using detail::json_double;
  using detail::json_int;
  if (!j.is_object()) throw ConfigError("$: config must be a JSON object");
  if (j.empty()) throw ConfigError("$: config object is empty");
  Settings s;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("$.preset: expected a string");
    s = preset(j["preset"].get<std::string>());
  }
  for (const auto& [key, v] : j.items()) {
    const std::string path = "$." + key;
    if (key == "preset") continue;
    if (key == "n_ions") s.trap.n_ions = json_int(v, path);
    else if (key == "omega_x_mhz") s.trap.omega_x_mhz = json_double(v, path);
    else if (key == "omega_z_mhz") s.trap.omega_z_mhz = json_double(v, path);
    else if (key == "mu_mhz") s.trap.mu_mhz = json_double(v, path);
    else if (key == "drive_khz") s.trap.drive_khz = json_double(v, path);
    else if (key == "j0_hz") s.trap.j0_hz = json_double(v, path);
    else if (key == "reference_n") s.reference_n = json_int(v, path);
    else if (key == "reference_omega_z_mhz") s.reference_omega_z_mhz = json_double(v, path);
    else if (key == "n_list" || key == "mu_grid") {
      if (!v.is_array()) throw ConfigError(path + ": expected an array");
      if (key == "n_list") s.n_list.clear();
      else s.mu_grid.clear();
      for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string ep = path + "[" + std::to_string(k) + "]";
        if (key == "n_list") s.n_list.push_back(json_int(v[k], ep));
        else s.mu_grid.push_back(json_double(v[k], ep));
      }
    } else if (key == "mu_points") s.mu_points = json_int(v, path);
    else if (key == "mu_detuning_min") s.mu_detuning_min = json_double(v, path);
    else if (key == "mu_detuning_max") s.mu_detuning_max = json_double(v, path);
    else if (key == "t_max") s.t_max = json_double(v, path);
    else if (key == "grid_points") s.grid_points = json_int(v, path);
    else if (key == "grid") {
      if (!v.is_string()) throw ConfigError(path + ": expected \"linear\" or \"log\"");
      const auto g = v.get<std::string>();
      if (g == "linear") s.grid = GridKind::linear;
      else if (g == "log") s.grid = GridKind::log;
      else throw ConfigError(path + ": expected \"linear\" or \"log\"");
    } else if (key == "delta") s.delta = json_double(v, path);
    else if (key == "control_alpha") s.control_alpha = json_double(v, path);
    else if (key == "control_n") s.control_n = json_int(v, path);
    else if (key == "threads") s.threads = json_int(v, path);
    else throw ConfigError(path + ": unknown key");
  }
  s.validate();
  return s;
}

inline Settings parse_config(const std::string& text, const std::string& source = "<string>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ": malformed JSON: " + e.what());
  }
  return settings_from_json(j);
}

inline Settings load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

/// Canonical JSON form; keys are emitted sorted.
inline nlohmann::json settings_to_json(const Settings& s) {
  nlohmann::json j;
  if (!s.preset.empty()) j["preset"] = s.preset;
  j["n_ions"] = s.trap.n_ions;
  j["omega_x_mhz"] = s.trap.omega_x_mhz;
  j["omega_z_mhz"] = s.trap.omega_z_mhz;
  j["mu_mhz"] = s.trap.mu_mhz;
  j["drive_khz"] = s.trap.drive_khz;
  j["j0_hz"] = s.trap.j0_hz;
  j["reference_n"] = s.reference_n;
  j["reference_omega_z_mhz"] = s.reference_omega_z_mhz;
  j["n_list"] = s.n_list;
  j["mu_grid"] = s.mu_grid;
  j["mu_points"] = s.mu_points;
  j["mu_detuning_min"] = s.mu_detuning_min;
  j["mu_detuning_max"] = s.mu_detuning_max;
  j["t_max"] = s.t_max;
  j["grid_points"] = s.grid_points;
  j["grid"] = s.grid == GridKind::linear ? "linear" : "log";
  j["delta"] = s.delta;
  j["control_alpha"] = s.control_alpha;
  j["control_n"] = s.control_n;
  j["threads"] = s.threads;
  return j;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

/// Hash of the canonical settings; the thread count does not affect results and is excluded.
inline std::string config_hash(const Settings& s) {
  nlohmann::json j = settings_to_json(s);
  j.erase("threads");
  return fnv1a_hex(j.dump());
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// One CSV cell: a number (17 significant digits) or text.
class CsvCell {
 public:
  CsvCell(double x) : text_(format_double(x)) {}
  CsvCell(int x) : text_(std::to_string(x)) {}
  CsvCell(long x) : text_(std::to_string(x)) {}
  CsvCell(std::size_t x) : text_(std::to_string(x)) {}
  CsvCell(const char* s) : text_(s) {}
  CsvCell(std::string s) : text_(std::move(s)) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;

  void add(std::vector<CsvCell> row) {
    if (row.size() != header.size()) throw ArgumentError("CSV row width does not match header");
    rows.push_back(std::move(row));
  }
};

inline std::string manifest_line(const std::string& hash, const std::string& kind) {
  return std::string("# pretherm ") + kVersion + " config_hash=" + hash + " table=" + kind;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string csv_text(const CsvTable& t, const std::string& manifest) {
  std::string s = manifest + "\n";
  for (std::size_t k = 0; k < t.header.size(); ++k) s += (k ? "," : "") + t.header[k];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) s += (k ? "," : "") + row[k].text();
    s += "\n";
  }
  return s;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t, const std::string& manifest) {
  write_text(path, csv_text(t, manifest));
}

struct ParsedCsv {
  std::string manifest;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw IoError("CSV has no column '" + name + "'");
  }
  double number(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(column(name))); }
};

inline ParsedCsv read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  ParsedCsv out;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      if (out.manifest.empty()) out.manifest = line;
      continue;
    }
    if (out.header.empty()) out.header = split(line);
    else out.rows.push_back(split(line));
  }
  return out;
}

}  // namespace pretherm
