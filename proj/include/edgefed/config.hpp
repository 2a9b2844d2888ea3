#pragma once

// SimConfig: defaults for the 15-station federation, a line-oriented
// `key = value` file format with [section] headers, and validation.
//
// Grammar
//   file     := { line }
//   line     := blank | comment | header | pair
//   comment  := ('#' | ';') text
//   header   := '[' name ']'
//   pair     := key '=' value [ comment ]
//
// Sections [simulation], [network], [workload] and [topology] may appear
// once each. [station] and [task_type] are repeatable: every header opens a
// new entry, and if any entry of that kind is present the built-in list is
// replaced wholesale.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "edgefed/heuristics.hpp"
#include "edgefed/model.hpp"

namespace edgefed {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigFileError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(int line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ConfigValidationError : public ConfigError {
 public:
  ConfigValidationError(std::string key, const std::string& what)
      : ConfigError(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class RefreshMode { TaskCount, WallClock };

struct WorkloadConfig {
  int vehicle_count{4000};
  Seconds duration{3600.0};
  std::optional<double> urgent_fraction{};  // empty: follow catalog rates
  double area_width{5000.0};
  double area_height{3000.0};
  std::uint64_t seed{1};

  friend bool operator==(const WorkloadConfig&, const WorkloadConfig&) = default;
};

struct SimulationOptions {
  PolicyKind policy{PolicyKind::BestProbability};
  double refresh_fraction{0.10};
  RefreshMode refresh_mode{RefreshMode::TaskCount};
  Seconds refresh_interval{600.0};
  std::size_t history_window{0};  // 0: keep every sample
  double drop_threshold{1e-9};
  double tie_tolerance{1e-9};
  bool first_improvement{false};
  bool downlink_via_receiving{false};
  double reference_mips{1600.0};
  double prior_sigma_fraction{0.1};
  int trials{20};
  std::uint64_t base_seed{1};

  friend bool operator==(const SimulationOptions&, const SimulationOptions&) = default;
};

struct SimConfig {
  std::vector<StationSpec> stations;
  double neighbor_radius{1000.0};
  NetworkModel network{};
  std::vector<TaskTypeSpec> task_types;
  WorkloadConfig workload{};
  SimulationOptions sim{};

  PolicyOptions policy_options() const {
    return {sim.drop_threshold, sim.tie_tolerance, sim.first_improvement};
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// 5 x 3 grid, 1000 m spacing, cell centres of a 5000 x 3000 m area. 4-core
// and 2-core stations alternate in a checkerboard, which yields 8 and 7.
inline std::vector<StationSpec> default_stations() {
  std::vector<StationSpec> out;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 5; ++col) {
      StationSpec s;
      s.id = static_cast<StationId>(out.size());
      s.position = {500.0 + 1000.0 * col, 500.0 + 1000.0 * row};
      s.core_count = (row + col) % 2 == 0 ? 4 : 2;
      s.mips_per_core = 1600.0;
      out.push_back(s);
    }
  }
  return out;
}

inline std::vector<TaskTypeSpec> default_task_types() {
  return {
      {0, "hazard_alert", true, 2000.0, 3000.0, 0.8, 0.2, 1.0, 1.25},
      {1, "lane_change_warning", true, 2000.0, 3000.0, 0.8, 0.2, 1.0, 1.25},
      {2, "onboard_entertainment", false, 10000.0, 15000.0, 8.0, 24.0, 10.0, 1.25},
      {3, "fuel_usage_statistics", false, 10000.0, 15000.0, 8.0, 24.0, 10.0, 1.25},
  };
}

// Stations within `radius` of each other are neighbors; radius <= 0 links
// every pair.
inline void derive_neighbors(std::vector<StationSpec>& stations, double radius) {
  for (auto& s : stations) {
    s.neighbor_ids.clear();
    for (const auto& o : stations) {
      if (o.id == s.id) continue;
      const double d = std::hypot(o.position.x - s.position.x, o.position.y - s.position.y);
      if (radius <= 0.0 || d <= radius + 1e-9) s.neighbor_ids.push_back(o.id);
    }
  }
}

inline void validate(const SimConfig& c) {
  auto fail = [](std::string key, const std::string& what) { throw ConfigValidationError(std::move(key), what); };

  if (c.stations.empty()) fail("station", "at least one station is required");
  for (std::size_t i = 0; i < c.stations.size(); ++i) {
    const auto& s = c.stations[i];
    const std::string k = "station[" + std::to_string(i) + "]";
    if (s.id != static_cast<StationId>(i)) fail(k + ".id", "must equal its position in the list (" + std::to_string(i) + ")");
    if (s.core_count <= 0) fail(k + ".cores", "must be positive");
    if (!(s.mips_per_core > 0.0)) fail(k + ".mips", "must be positive");
    if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y)) fail(k + ".x", "position must be finite");
    std::set<StationId> seen;
    for (StationId n : s.neighbor_ids) {
      if (n == s.id) fail(k + ".neighbors", "a station cannot neighbor itself");
      if (n < 0 || n >= static_cast<StationId>(c.stations.size())) fail(k + ".neighbors", "unknown station " + std::to_string(n));
      if (!seen.insert(n).second) fail(k + ".neighbors", "duplicate station " + std::to_string(n));
    }
  }
  if (!(c.network.wlan_bandwidth > 0.0)) fail("network.wlan_bandwidth", "must be positive");
  if (!(c.network.lan_transfer_delay >= 0.0)) fail("network.lan_transfer_delay", "must be non-negative");
  if (!(c.network.lan_bandwidth >= 0.0)) fail("network.lan_bandwidth", "must be non-negative");

  if (c.task_types.empty()) fail("task_type", "at least one task type is required");
  for (std::size_t i = 0; i < c.task_types.size(); ++i) {
    const auto& t = c.task_types[i];
    const std::string k = "task_type[" + std::to_string(i) + "]";
    if (t.type_id != static_cast<TaskTypeId>(i)) fail(k + ".id", "must equal its position in the list (" + std::to_string(i) + ")");
    if (!(t.length_min > 0.0)) fail(k + ".length_min", "must be positive");
    if (!(t.length_max >= t.length_min)) fail(k + ".length_max", "must be >= length_min");
    if (!(t.data_size_up > 0.0)) fail(k + ".data_up", "must be positive");
    if (!(t.data_size_down > 0.0)) fail(k + ".data_down", "must be positive");
    if (!(t.slack >= 0.0)) fail(k + ".slack", "must be non-negative");
    if (!(t.requests_per_vehicle_per_hour >= 0.0)) fail(k + ".rate", "must be non-negative");
  }

  const auto& w = c.workload;
  if (w.vehicle_count < 0) fail("workload.vehicles", "must be non-negative");
  if (!(w.duration > 0.0)) fail("workload.duration", "must be positive");
  if (w.urgent_fraction && !(*w.urgent_fraction >= 0.0 && *w.urgent_fraction <= 1.0)) {
    fail("workload.urgent_fraction", "must lie in [0, 1]");
  }
  if (w.urgent_fraction) {
    const bool has_urgent = std::any_of(c.task_types.begin(), c.task_types.end(), [](auto& t) { return t.urgent; });
    const bool has_regular = std::any_of(c.task_types.begin(), c.task_types.end(), [](auto& t) { return !t.urgent; });
    if ((*w.urgent_fraction > 0.0 && !has_urgent) || (*w.urgent_fraction < 1.0 && !has_regular)) {
      fail("workload.urgent_fraction", "catalog lacks the urgent or non-urgent types this fraction needs");
    }
  }
  if (!(w.area_width > 0.0)) fail("workload.area_width", "must be positive");
  if (!(w.area_height > 0.0)) fail("workload.area_height", "must be positive");

  const auto& s = c.sim;
  if (!(s.refresh_fraction > 0.0 && s.refresh_fraction <= 1.0)) fail("simulation.refresh_fraction", "must lie in (0, 1]");
  if (!(s.refresh_interval > 0.0)) fail("simulation.refresh_interval", "must be positive");
  if (!(s.drop_threshold >= 0.0 && s.drop_threshold <= 1.0)) fail("simulation.drop_threshold", "must lie in [0, 1]");
  if (!(s.tie_tolerance >= 0.0)) fail("simulation.tie_tolerance", "must be non-negative");
  if (!(s.reference_mips > 0.0)) fail("simulation.reference_mips", "must be positive");
  if (!(s.prior_sigma_fraction >= 0.0)) fail("simulation.prior_sigma_fraction", "must be non-negative");
  if (s.trials < 1) fail("simulation.trials", "must be at least 1");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

struct ValueReader {
  std::string key;
  std::string_view text;

  [[noreturn]] void bad(const std::string& what) const { throw ConfigValidationError(key, what); }

  double number() const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) bad("expected a number, got '" + std::string(text) + "'");
    return v;
  }
  template <typename Int>
  Int integer() const {
    Int v{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) bad("expected an integer, got '" + std::string(text) + "'");
    return v;
  }
  bool boolean() const {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    bad("expected true or false, got '" + std::string(text) + "'");
  }
  std::vector<StationId> id_list() const {
    std::vector<StationId> out;
    std::string_view rest = text;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (!item.empty()) out.push_back(ValueReader{key, item}.integer<StationId>());
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }
};

}  // namespace detail

// Parses config text. Omitted keys keep their defaults; neighbor lists
// left empty are derived from topology.neighbor_radius.
inline SimConfig parse_config(std::string_view text) {
  SimConfig c;
  std::vector<StationSpec> stations;
  std::vector<TaskTypeSpec> types;
  std::vector<bool> explicit_neighbors;
  std::set<std::string> singletons;
  std::set<std::string> keys_seen;
  std::string section;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigParseError(line_no, "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section == "station") {
        StationSpec s;
        s.id = static_cast<StationId>(stations.size());
        s.core_count = 4;
        s.mips_per_core = 1600.0;
        stations.push_back(s);
        explicit_neighbors.push_back(false);
      } else if (section == "task_type") {
        TaskTypeSpec t;
        t.type_id = static_cast<TaskTypeId>(types.size());
        types.push_back(t);
      } else if (section == "simulation" || section == "network" || section == "workload" || section == "topology") {
        if (!singletons.insert(section).second) throw ConfigParseError(line_no, "section [" + section + "] repeated");
      } else {
        throw ConfigParseError(line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParseError(line_no, "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    auto value = detail::trim(line.substr(eq + 1));
    for (std::size_t i = 0; i < value.size(); ++i) {
      if ((value[i] == '#' || value[i] == ';') && (i == 0 || value[i - 1] == ' ' || value[i - 1] == '\t')) {
        value = detail::trim(value.substr(0, i));
        break;
      }
    }
    if (key.empty()) throw ConfigParseError(line_no, "empty key");
    if (section.empty()) throw ConfigParseError(line_no, "key '" + key + "' outside any section");

    std::string path;
    if (section == "station") path = "station[" + std::to_string(stations.size() - 1) + "]." + key;
    else if (section == "task_type") path = "task_type[" + std::to_string(types.size() - 1) + "]." + key;
    else path = section + "." + key;
    if (!keys_seen.insert(path).second) throw ConfigParseError(line_no, "duplicate key " + path);

    const detail::ValueReader v{path, value};
    auto unknown = [&] { throw ConfigValidationError(path, "unknown key"); };

    if (section == "simulation") {
      auto& s = c.sim;
      if (key == "policy") {
        auto p = parse_policy(value);
        if (!p) v.bad("unknown policy '" + std::string(value) + "' (expected bp, mect, mc or nr)");
        s.policy = *p;
      } else if (key == "refresh_fraction") s.refresh_fraction = v.number();
      else if (key == "refresh_mode") {
        if (value == "tasks") s.refresh_mode = RefreshMode::TaskCount;
        else if (value == "time") s.refresh_mode = RefreshMode::WallClock;
        else v.bad("expected 'tasks' or 'time'");
      } else if (key == "refresh_interval") s.refresh_interval = v.number();
      else if (key == "history_window") s.history_window = v.integer<std::size_t>();
      else if (key == "drop_threshold") s.drop_threshold = v.number();
      else if (key == "tie_tolerance") s.tie_tolerance = v.number();
      else if (key == "first_improvement") s.first_improvement = v.boolean();
      else if (key == "downlink_via_receiving") s.downlink_via_receiving = v.boolean();
      else if (key == "reference_mips") s.reference_mips = v.number();
      else if (key == "prior_sigma_fraction") s.prior_sigma_fraction = v.number();
      else if (key == "trials") s.trials = v.integer<int>();
      else if (key == "base_seed") s.base_seed = v.integer<std::uint64_t>();
      else unknown();
    } else if (section == "network") {
      if (key == "wlan_bandwidth") c.network.wlan_bandwidth = v.number();
      else if (key == "lan_transfer_delay") c.network.lan_transfer_delay = v.number();
      else if (key == "lan_bandwidth") c.network.lan_bandwidth = v.number();
      else unknown();
    } else if (section == "workload") {
      auto& w = c.workload;
      if (key == "vehicles") w.vehicle_count = v.integer<int>();
      else if (key == "duration") w.duration = v.number();
      else if (key == "urgent_fraction") {
        if (value == "catalog") w.urgent_fraction.reset();
        else w.urgent_fraction = v.number();
      } else if (key == "area_width") w.area_width = v.number();
      else if (key == "area_height") w.area_height = v.number();
      else if (key == "seed") w.seed = v.integer<std::uint64_t>();
      else unknown();
    } else if (section == "topology") {
      if (key == "neighbor_radius") c.neighbor_radius = v.number();
      else unknown();
    } else if (section == "station") {
      auto& s = stations.back();
      if (key == "id") s.id = v.integer<StationId>();
      else if (key == "x") s.position.x = v.number();
      else if (key == "y") s.position.y = v.number();
      else if (key == "cores") s.core_count = v.integer<int>();
      else if (key == "mips") s.mips_per_core = v.number();
      else if (key == "neighbors") {
        s.neighbor_ids = v.id_list();
        explicit_neighbors.back() = true;
      } else unknown();
    } else if (section == "task_type") {
      auto& t = types.back();
      if (key == "id") t.type_id = v.integer<TaskTypeId>();
      else if (key == "name") t.name = std::string(value);
      else if (key == "urgent") t.urgent = v.boolean();
      else if (key == "length_min") t.length_min = v.number();
      else if (key == "length_max") t.length_max = v.number();
      else if (key == "data_up") t.data_size_up = v.number();
      else if (key == "data_down") t.data_size_down = v.number();
      else if (key == "slack") t.slack = v.number();
      else if (key == "rate") t.requests_per_vehicle_per_hour = v.number();
      else unknown();
    }
  }

  if (stations.empty()) {
    c.stations = default_stations();
    explicit_neighbors.assign(c.stations.size(), false);
  } else {
    c.stations = std::move(stations);
  }
  c.task_types = types.empty() ? default_task_types() : std::move(types);

  const bool any_explicit = std::find(explicit_neighbors.begin(), explicit_neighbors.end(), true) != explicit_neighbors.end();
  if (!any_explicit) derive_neighbors(c.stations, c.neighbor_radius);

  validate(c);
  return c;
}

inline SimConfig default_config() { return parse_config(""); }

// FNV-1a over the canonical dump with seeds and policy blanked out, so runs
// that differ only in trial seed or policy share a digest.
inline std::string config_digest(SimConfig c);

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// Writes every field, including derived neighbor lists, so that
// parse_config(dump_config(c)) == c.
inline std::string dump_config(const SimConfig& c) {
  using detail::format_double;
  std::ostringstream o;
  const auto& s = c.sim;
  o << "[simulation]\n"
    << "policy = " << policy_name(s.policy) << "\n"
    << "refresh_fraction = " << format_double(s.refresh_fraction) << "\n"
    << "refresh_mode = " << (s.refresh_mode == RefreshMode::TaskCount ? "tasks" : "time") << "\n"
    << "refresh_interval = " << format_double(s.refresh_interval) << "\n"
    << "history_window = " << s.history_window << "\n"
    << "drop_threshold = " << format_double(s.drop_threshold) << "\n"
    << "tie_tolerance = " << format_double(s.tie_tolerance) << "\n"
    << "first_improvement = " << (s.first_improvement ? "true" : "false") << "\n"
    << "downlink_via_receiving = " << (s.downlink_via_receiving ? "true" : "false") << "\n"
    << "reference_mips = " << format_double(s.reference_mips) << "\n"
    << "prior_sigma_fraction = " << format_double(s.prior_sigma_fraction) << "\n"
    << "trials = " << s.trials << "\n"
    << "base_seed = " << s.base_seed << "\n\n";

  o << "[network]\n"
    << "wlan_bandwidth = " << format_double(c.network.wlan_bandwidth) << "\n"
    << "lan_transfer_delay = " << format_double(c.network.lan_transfer_delay) << "\n"
    << "lan_bandwidth = " << format_double(c.network.lan_bandwidth) << "\n\n";

  const auto& w = c.workload;
  o << "[workload]\n"
    << "vehicles = " << w.vehicle_count << "\n"
    << "duration = " << format_double(w.duration) << "\n"
    << "urgent_fraction = " << (w.urgent_fraction ? format_double(*w.urgent_fraction) : std::string("catalog")) << "\n"
    << "area_width = " << format_double(w.area_width) << "\n"
    << "area_height = " << format_double(w.area_height) << "\n"
    << "seed = " << w.seed << "\n\n";

  o << "[topology]\nneighbor_radius = " << format_double(c.neighbor_radius) << "\n";

  for (const auto& st : c.stations) {
    o << "\n[station]\n"
      << "id = " << st.id << "\n"
      << "x = " << format_double(st.position.x) << "\n"
      << "y = " << format_double(st.position.y) << "\n"
      << "cores = " << st.core_count << "\n"
      << "mips = " << format_double(st.mips_per_core) << "\n"
      << "neighbors = ";
    for (std::size_t i = 0; i < st.neighbor_ids.size(); ++i) o << (i ? "," : "") << st.neighbor_ids[i];
    o << "\n";
  }
  for (const auto& t : c.task_types) {
    o << "\n[task_type]\n"
      << "id = " << t.type_id << "\n"
      << "name = " << t.name << "\n"
      << "urgent = " << (t.urgent ? "true" : "false") << "\n"
      << "length_min = " << format_double(t.length_min) << "\n"
      << "length_max = " << format_double(t.length_max) << "\n"
      << "data_up = " << format_double(t.data_size_up) << "\n"
      << "data_down = " << format_double(t.data_size_down) << "\n"
      << "slack = " << format_double(t.slack) << "\n"
      << "rate = " << format_double(t.requests_per_vehicle_per_hour) << "\n";
  }
  return o.str();
}

inline std::string config_digest(SimConfig c) {
  c.workload.seed = 0;
  c.sim.base_seed = 0;
  c.sim.policy = PolicyKind::BestProbability;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump_config(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
  return out;
}

}  // namespace edgefed
