#pragma once

// Per-run outcome counters, deadline miss rates, and trial aggregation.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "edgefed/model.hpp"

namespace edgefed {

// Raised when a rate has an empty denominator.
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counters for one station. `received` and `dropped` are charged to the
// receiving station; the rest to the executing station.
struct StationCounters {
  std::int64_t received{0};
  std::int64_t executed{0};
  std::int64_t completed_on_time{0};
  std::int64_t completed_late{0};
  std::int64_t dropped{0};
  double mean_queue_wait{0.0};
  double mean_e2e_delay{0.0};

  std::int64_t misses() const { return completed_late + dropped; }

  friend bool operator==(const StationCounters&, const StationCounters&) = default;
};

struct MetricsReport {
  std::vector<StationCounters> per_station;
  StationCounters system;
  std::int64_t transfers{0};
  std::string policy_name;
  std::uint64_t seed{0};
  std::string config_digest;
  int vehicles{0};
  std::optional<double> urgent_fraction;

  std::int64_t generated() const { return system.received; }

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline double miss_rate(const MetricsReport& r) {
  if (r.generated() <= 0) throw UndefinedMetric("miss rate undefined: no tasks generated");
  return static_cast<double>(r.system.misses()) / static_cast<double>(r.generated());
}

inline double per_station_miss_rate(const MetricsReport& r, StationId station) {
  if (station < 0 || static_cast<std::size_t>(station) >= r.per_station.size()) {
    throw MetricsError("unknown station " + std::to_string(station));
  }
  const auto& s = r.per_station[static_cast<std::size_t>(station)];
  const auto denom = s.executed + s.dropped;
  if (denom <= 0) throw UndefinedMetric("station " + std::to_string(station) + " executed and dropped nothing");
  return static_cast<double>(s.misses()) / static_cast<double>(denom);
}

// Averages of the per-station miss rate within one run: over every station
// with a defined rate, and over the stations that missed at least once.
struct PerStationSummary {
  double mean_all{0.0};
  double mean_missing_only{0.0};
};

inline PerStationSummary summarize_stations(const MetricsReport& r) {
  double all = 0.0, missing = 0.0;
  int n_all = 0, n_missing = 0;
  for (std::size_t i = 0; i < r.per_station.size(); ++i) {
    const auto& s = r.per_station[i];
    if (s.executed + s.dropped == 0) continue;
    const double rate = per_station_miss_rate(r, static_cast<StationId>(i));
    all += rate;
    ++n_all;
    if (s.misses() > 0) {
      missing += rate;
      ++n_missing;
    }
  }
  return {n_all ? all / n_all : 0.0, n_missing ? missing / n_missing : 0.0};
}

struct TrialAggregate {
  std::vector<MetricsReport> runs;
  double mean_miss_rate{0.0};
  double std_miss_rate{0.0};
  // Mean over runs where the station's rate is defined; NaN if never.
  std::vector<double> per_station_mean_miss_rate;
  double per_bs_mean_all{0.0};
  double per_bs_mean_missing_only{0.0};
};

// Mean and sample standard deviation (0 for a single value).
inline std::pair<double, double> mean_and_std(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

// Runs with no generated tasks contribute a miss rate of zero.
inline TrialAggregate aggregate(std::vector<MetricsReport> reports) {
  if (reports.empty()) throw MetricsError("nothing to aggregate");
  for (const auto& r : reports) {
    if (r.config_digest != reports.front().config_digest) throw MetricsError("cannot aggregate runs of different configs");
    if (r.policy_name != reports.front().policy_name) throw MetricsError("cannot aggregate runs of different policies");
    if (r.per_station.size() != reports.front().per_station.size()) throw MetricsError("station count differs between runs");
  }

  // Fixed summation order (by seed) keeps the result independent of the
  // order the runs arrive in.
  std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });

  TrialAggregate agg;
  std::vector<double> rates, per_all, per_missing;
  for (const auto& r : reports) {
    rates.push_back(r.generated() > 0 ? miss_rate(r) : 0.0);
    const auto s = summarize_stations(r);
    per_all.push_back(s.mean_all);
    per_missing.push_back(s.mean_missing_only);
  }
  std::tie(agg.mean_miss_rate, agg.std_miss_rate) = mean_and_std(rates);
  agg.per_bs_mean_all = mean_and_std(per_all).first;
  agg.per_bs_mean_missing_only = mean_and_std(per_missing).first;

  const auto n_st = reports.front().per_station.size();
  agg.per_station_mean_miss_rate.assign(n_st, std::nan(""));
  for (std::size_t i = 0; i < n_st; ++i) {
    std::vector<double> xs;
    for (const auto& r : reports) {
      const auto& s = r.per_station[i];
      if (s.executed + s.dropped > 0) xs.push_back(per_station_miss_rate(r, static_cast<StationId>(i)));
    }
    if (!xs.empty()) agg.per_station_mean_miss_rate[i] = mean_and_std(xs).first;
  }
  agg.runs = std::move(reports);
  return agg;
}

namespace detail {

inline std::string fmt_num(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline std::string fmt_fraction(const std::optional<double>& f) { return f ? fmt_num(*f) : std::string("catalog"); }

}  // namespace detail

inline constexpr std::string_view kRunsCsvHeader = "policy,seed,vehicles,urgent_fraction,miss_rate,drops,transfers\n";
inline constexpr std::string_view kStationsCsvHeader =
    "policy,seed,vehicles,urgent_fraction,station,received,executed,completed_on_time,completed_late,dropped,"
    "miss_rate,mean_queue_wait,mean_e2e_delay\n";

inline std::string runs_csv_row(const MetricsReport& r) {
  std::string out = r.policy_name + "," + std::to_string(r.seed) + "," + std::to_string(r.vehicles) + "," +
                    detail::fmt_fraction(r.urgent_fraction) + ",";
  out += r.generated() > 0 ? detail::fmt_num(miss_rate(r)) : std::string("nan");
  out += "," + std::to_string(r.system.dropped) + "," + std::to_string(r.transfers) + "\n";
  return out;
}

inline std::string stations_csv_rows(const MetricsReport& r) {
  std::string out;
  for (std::size_t i = 0; i < r.per_station.size(); ++i) {
    const auto& s = r.per_station[i];
    out += r.policy_name + "," + std::to_string(r.seed) + "," + std::to_string(r.vehicles) + "," +
           detail::fmt_fraction(r.urgent_fraction) + "," + std::to_string(i) + "," + std::to_string(s.received) + "," +
           std::to_string(s.executed) + "," + std::to_string(s.completed_on_time) + "," +
           std::to_string(s.completed_late) + "," + std::to_string(s.dropped) + ",";
    out += s.executed + s.dropped > 0 ? detail::fmt_num(per_station_miss_rate(r, static_cast<StationId>(i)))
                                      : std::string("nan");
    out += "," + detail::fmt_num(s.mean_queue_wait) + "," + detail::fmt_num(s.mean_e2e_delay) + "\n";
  }
  return out;
}

// Text form of a report, one `key value...` record per line.
inline std::string serialize_report(const MetricsReport& r) {
  auto counters = [](const StationCounters& s) {
    return std::to_string(s.received) + " " + std::to_string(s.executed) + " " + std::to_string(s.completed_on_time) +
           " " + std::to_string(s.completed_late) + " " + std::to_string(s.dropped) + " " +
           detail::fmt_num(s.mean_queue_wait) + " " + detail::fmt_num(s.mean_e2e_delay);
  };
  std::ostringstream o;
  o << "policy " << r.policy_name << "\n"
    << "seed " << r.seed << "\n"
    << "config_digest " << r.config_digest << "\n"
    << "vehicles " << r.vehicles << "\n"
    << "urgent_fraction " << detail::fmt_fraction(r.urgent_fraction) << "\n"
    << "transfers " << r.transfers << "\n"
    << "system " << counters(r.system) << "\n";
  for (const auto& s : r.per_station) o << "station " << counters(s) << "\n";
  return o.str();
}

inline MetricsReport parse_report(std::string_view text) {
  MetricsReport r;
  std::istringstream in{std::string(text)};
  std::string key;
  auto read_counters = [&](StationCounters& s) {
    if (!(in >> s.received >> s.executed >> s.completed_on_time >> s.completed_late >> s.dropped)) {
      throw MetricsError("malformed counters");
    }
    std::string q, e;
    in >> q >> e;
    auto num = [](const std::string& t) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || p != t.data() + t.size()) throw MetricsError("bad number '" + t + "'");
      return v;
    };
    s.mean_queue_wait = num(q);
    s.mean_e2e_delay = num(e);
  };
  while (in >> key) {
    if (key == "policy") in >> r.policy_name;
    else if (key == "seed") in >> r.seed;
    else if (key == "config_digest") in >> r.config_digest;
    else if (key == "vehicles") in >> r.vehicles;
    else if (key == "urgent_fraction") {
      std::string f;
      in >> f;
      if (f == "catalog") r.urgent_fraction.reset();
      else r.urgent_fraction = std::stod(f);
    } else if (key == "transfers") in >> r.transfers;
    else if (key == "system") read_counters(r.system);
    else if (key == "station") read_counters(r.per_station.emplace_back());
    else throw MetricsError("unknown report key '" + key + "'");
    if (!in) throw MetricsError("malformed value for '" + key + "'");
  }
  return r;
}

}  // namespace edgefed
