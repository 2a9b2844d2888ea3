#pragma once

// Synthetic vehicular workload: Poisson arrivals over the service area,
// nearest-station routing, and a flat trace format for replaying the same
// workload under several policies.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefed/config.hpp"
#include "edgefed/model.hpp"

namespace edgefed {

class WorkloadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Euclidean argmin; ties go to the lower station id.
inline StationId nearest_station(Position p, std::span<const StationSpec> stations) {
  if (stations.empty()) throw WorkloadError("no stations to route to");
  StationId best = stations.front().id;
  double best_d2 = INFINITY;
  for (const auto& s : stations) {
    const double dx = s.position.x - p.x;
    const double dy = s.position.y - p.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2 || (d2 == best_d2 && s.id < best)) {
      best = s.id;
      best_d2 = d2;
    }
  }
  return best;
}

// Mean completion time of a type on a reference core; E_i in the deadline.
inline Seconds reference_completion_time(const TaskTypeSpec& type, double reference_mips) {
  return type.mean_length() / reference_mips;
}

// The part of a task that a trace file carries.
struct TraceRecord {
  Seconds time{0.0};
  TaskTypeId type_id{0};
  double length{0.0};
  Position position{};
  double data_size_up{0.0};
  double data_size_down{0.0};

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Fills in urgency, deadline and receiving station for a trace record.
inline Task make_task(TaskId id, const TraceRecord& r, const SimConfig& cfg) {
  if (r.type_id < 0 || r.type_id >= static_cast<TaskTypeId>(cfg.task_types.size())) {
    throw WorkloadError("task " + std::to_string(id) + " has unknown type " + std::to_string(r.type_id));
  }
  const auto& type = cfg.task_types[static_cast<std::size_t>(r.type_id)];
  Task t;
  t.id = id;
  t.type_id = r.type_id;
  t.length = r.length;
  t.data_size_up = r.data_size_up;
  t.data_size_down = r.data_size_down;
  t.urgent = type.urgent;
  t.origin_position = r.position;
  t.arrival_time = r.time;
  t.deadline = compute_deadline(t, reference_completion_time(type, cfg.sim.reference_mips), type.slack, cfg.network);
  t.receiving_station = nearest_station(r.position, cfg.stations);
  return t;
}

inline double aggregate_rate_per_second(const WorkloadConfig& w, std::span<const TaskTypeSpec> types) {
  double per_vehicle = 0.0;
  for (const auto& t : types) per_vehicle += t.requests_per_vehicle_per_hour;
  return static_cast<double>(w.vehicle_count) * per_vehicle / 3600.0;
}

namespace detail {

inline std::mt19937_64 seeded_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

// Picks an index from `pool` proportionally to the types' rates (uniformly
// if every rate in the pool is zero).
class TypePicker {
 public:
  explicit TypePicker(std::vector<const TaskTypeSpec*> pool) : pool_(std::move(pool)) {
    std::vector<double> w;
    double total = 0.0;
    for (const auto* t : pool_) {
      w.push_back(t->requests_per_vehicle_per_hour);
      total += t->requests_per_vehicle_per_hour;
    }
    if (total <= 0.0) std::fill(w.begin(), w.end(), 1.0);
    if (!pool_.empty()) dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
  bool empty() const { return pool_.empty(); }
  template <typename Rng>
  const TaskTypeSpec& operator()(Rng& rng) {
    return *pool_[dist_(rng)];
  }

 private:
  std::vector<const TaskTypeSpec*> pool_;
  std::discrete_distribution<std::size_t> dist_;
};

}  // namespace detail

// Poisson arrivals with rate vehicles * sum(type rates) over [0, duration).
// Output is sorted by arrival time and fully determined by cfg.workload.seed.
inline std::vector<TraceRecord> generate_trace(const SimConfig& cfg) {
  if (cfg.stations.empty()) throw WorkloadError("no stations configured");
  const auto& w = cfg.workload;
  const double lambda = aggregate_rate_per_second(w, cfg.task_types);
  std::vector<TraceRecord> out;
  if (lambda <= 0.0) return out;

  auto rng = detail::seeded_engine(w.seed);
  std::exponential_distribution<double> gap(lambda);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<const TaskTypeSpec*> all, urgent, regular;
  for (const auto& t : cfg.task_types) {
    all.push_back(&t);
    (t.urgent ? urgent : regular).push_back(&t);
  }
  detail::TypePicker pick_any(all), pick_urgent(urgent), pick_regular(regular);

  out.reserve(static_cast<std::size_t>(lambda * w.duration * 1.1) + 16);
  Seconds now = 0.0;
  while (true) {
    now += gap(rng);
    if (now >= w.duration) break;
    const TaskTypeSpec* type = nullptr;
    if (w.urgent_fraction) {
      const bool want_urgent = unit(rng) < *w.urgent_fraction;
      auto& picker = want_urgent ? pick_urgent : pick_regular;
      if (picker.empty()) throw WorkloadError("urgent_fraction requires both urgent and non-urgent task types");
      type = &picker(rng);
    } else {
      type = &pick_any(rng);
    }
    TraceRecord r;
    r.time = now;
    r.type_id = type->type_id;
    r.length = type->length_min + (type->length_max - type->length_min) * unit(rng);
    r.position = {w.area_width * unit(rng), w.area_height * unit(rng)};
    r.data_size_up = type->data_size_up;
    r.data_size_down = type->data_size_down;
    out.push_back(r);
  }
  return out;
}

inline std::vector<Task> make_tasks(std::span<const TraceRecord> trace, const SimConfig& cfg) {
  std::vector<Task> tasks;
  tasks.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) tasks.push_back(make_task(static_cast<TaskId>(i), trace[i], cfg));
  return tasks;
}

inline std::vector<Task> generate(const SimConfig& cfg) { return make_tasks(generate_trace(cfg), cfg); }

// Trace file: a header line, then one task per line, tab separated:
//   time  type  length  x  y  data_up  data_down
// Doubles use the shortest round-trip representation.
inline std::string write_trace(std::span<const TraceRecord> trace) {
  std::string out = "# time\ttype\tlength\tx\ty\tdata_up\tdata_down\n";
  std::array<char, 64> buf{};
  auto put = [&](double v, char sep) {
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), end);
    out.push_back(sep);
  };
  for (const auto& r : trace) {
    put(r.time, '\t');
    out += std::to_string(r.type_id);
    out.push_back('\t');
    put(r.length, '\t');
    put(r.position.x, '\t');
    put(r.position.y, '\t');
    put(r.data_size_up, '\t');
    put(r.data_size_down, '\n');
  }
  return out;
}

inline std::vector<TraceRecord> read_trace(std::string_view text) {
  std::vector<TraceRecord> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    std::array<std::string_view, 7> f{};
    std::size_t n = 0, start = 0;
    while (n < f.size()) {
      const auto tab = line.find('\t', start);
      f[n++] = line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start);
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (n != f.size()) throw WorkloadError("trace line " + std::to_string(line_no) + ": expected 7 fields");

    auto num = [&](std::string_view s, auto& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw WorkloadError("trace line " + std::to_string(line_no) + ": bad field '" + std::string(s) + "'");
      }
    };
    TraceRecord r;
    num(f[0], r.time);
    num(f[1], r.type_id);
    num(f[2], r.length);
    num(f[3], r.position.x);
    num(f[4], r.position.y);
    num(f[5], r.data_size_up);
    num(f[6], r.data_size_down);
    if (!out.empty() && r.time < out.back().time) {
      throw WorkloadError("trace line " + std::to_string(line_no) + ": arrivals out of order");
    }
    out.push_back(r);
  }
  return out;
}

inline void save_trace(const std::string& path, std::span<const TraceRecord> trace) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw WorkloadError("cannot write trace file '" + path + "'");
  o << write_trace(trace);
}

inline std::vector<TraceRecord> load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorkloadError("cannot open trace file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return read_trace(ss.str());
}

}  // namespace edgefed
