#pragma once

// Seeded, paired multi-trial experiments and their CSV outputs.
//
// Every trial seed is derived from (base_seed, sweep point, trial index)
// only, so all policies at one point replay the same workload trace.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "edgefed/config.hpp"
#include "edgefed/metrics.hpp"
#include "edgefed/simulator.hpp"
#include "edgefed/workload.hpp"

namespace edgefed {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t point, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ point) ^ trial);
}

enum class SweepKind { Vehicles, Urgency, SingleBs };

inline const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Vehicles: return "vehicles";
    case SweepKind::Urgency: return "urgency";
    case SweepKind::SingleBs: return "single-bs";
  }
  return "?";
}

inline std::optional<SweepKind> parse_sweep(std::string_view s) {
  if (s == "vehicles") return SweepKind::Vehicles;
  if (s == "urgency") return SweepKind::Urgency;
  if (s == "single-bs") return SweepKind::SingleBs;
  return std::nullopt;
}

struct SweepPoint {
  int vehicles{0};
  std::optional<double> urgent_fraction;
};

// vehicles / single-bs: 2000..7000 step 1000 at the configured urgency.
// urgency: 0.1..0.9 step 0.1 at the configured vehicle count.
inline std::vector<SweepPoint> sweep_points(SweepKind kind, const SimConfig& cfg) {
  std::vector<SweepPoint> out;
  if (kind == SweepKind::Urgency) {
    for (int i = 1; i <= 9; ++i) out.push_back({cfg.workload.vehicle_count, i / 10.0});
  } else {
    for (int v = 2000; v <= 7000; v += 1000) out.push_back({v, cfg.workload.urgent_fraction});
  }
  return out;
}

inline SimConfig at_point(SimConfig cfg, const SweepPoint& p) {
  cfg.workload.vehicle_count = p.vehicles;
  cfg.workload.urgent_fraction = p.urgent_fraction;
  return cfg;
}

// Reports for one sweep point: runs[policy][trial].
struct PointResult {
  SweepPoint point;
  std::vector<PolicyKind> policies;
  std::vector<std::vector<MetricsReport>> runs;
};

inline unsigned thread_budget() {
  if (const char* env = std::getenv("EDGEFED_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// One trial: generate the trace once, then replay it under each policy.
inline std::vector<MetricsReport> run_trial(const SimConfig& cfg, std::uint64_t seed,
                                            const std::vector<PolicyKind>& policies) {
  SimConfig c = cfg;
  c.workload.seed = seed;
  const auto trace = generate_trace(c);
  std::vector<MetricsReport> out;
  for (PolicyKind p : policies) {
    c.sim.policy = p;
    out.push_back(run_tasks(c, make_tasks(trace, c)));
  }
  return out;
}

inline PointResult run_point(const SimConfig& base, const SweepPoint& point, std::uint64_t point_index,
                             const std::vector<PolicyKind>& policies, unsigned threads = thread_budget()) {
  const SimConfig cfg = at_point(base, point);
  const int trials = cfg.sim.trials;
  std::vector<std::vector<MetricsReport>> by_trial(static_cast<std::size_t>(trials));

  int next = 0;
  while (next < trials) {
    std::vector<std::pair<int, std::future<std::vector<MetricsReport>>>> batch;
    for (unsigned k = 0; k < threads && next < trials; ++k, ++next) {
      const auto seed = derive_seed(cfg.sim.base_seed, point_index, static_cast<std::uint64_t>(next));
      batch.emplace_back(next, std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                          [&cfg, seed, &policies] { return run_trial(cfg, seed, policies); }));
    }
    for (auto& [i, fut] : batch) by_trial[static_cast<std::size_t>(i)] = fut.get();
  }

  PointResult r{point, policies, {}};
  r.runs.resize(policies.size());
  for (std::size_t p = 0; p < policies.size(); ++p) {
    for (auto& trial : by_trial) r.runs[p].push_back(trial[p]);
  }
  return r;
}

inline constexpr std::string_view kSweepCsvHeader =
    "sweep,vehicles,urgent_fraction,policy,trials,mean,std,per_bs_mean_all,per_bs_mean_missing_only\n";

struct CsvFragments {
  std::string runs;
  std::string stations;
  std::string sweep;
};

inline CsvFragments render_point(const std::string& sweep_label, const PointResult& r) {
  CsvFragments f;
  for (std::size_t p = 0; p < r.policies.size(); ++p) {
    for (const auto& rep : r.runs[p]) {
      f.runs += runs_csv_row(rep);
      f.stations += stations_csv_rows(rep);
    }
    const auto agg = aggregate(r.runs[p]);
    f.sweep += sweep_label + "," + std::to_string(r.point.vehicles) + "," + detail::fmt_fraction(r.point.urgent_fraction) +
               "," + policy_name(r.policies[p]) + "," + std::to_string(r.runs[p].size()) + "," +
               detail::fmt_num(agg.mean_miss_rate) + "," + detail::fmt_num(agg.std_miss_rate) + "," +
               detail::fmt_num(agg.per_bs_mean_all) + "," + detail::fmt_num(agg.per_bs_mean_missing_only) + "\n";
  }
  return f;
}

namespace detail {

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, std::string_view text) {
  std::ofstream o(p, std::ios::binary | std::ios::trunc);
  if (!o) throw std::runtime_error("cannot write '" + p.string() + "'");
  o << text;
}

}  // namespace detail

// Runs a sweep into `out_dir`, writing runs.csv, stations.csv and
// sweep.csv. Finished points are recorded in sweep.index together with
// their CSV fragments, so an interrupted sweep resumes where it stopped and
// still produces identical files.
class SweepRunner {
 public:
  SweepRunner(SimConfig cfg, SweepKind kind, std::filesystem::path out_dir,
              std::vector<PolicyKind> policies = {std::begin(kAllPolicies), std::end(kAllPolicies)})
      : cfg_(std::move(cfg)), kind_(kind), out_(std::move(out_dir)), policies_(std::move(policies)) {}

  // Called after each point; returning false stops the sweep early.
  using Progress = std::function<bool(std::size_t index, const PointResult&)>;

  std::vector<PointResult> run(const Progress& progress = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_ / "points");
    const auto points = sweep_points(kind_, cfg_);
    const std::string stamp = index_stamp();

    std::set<std::size_t> done;
    const auto index_path = out_ / "sweep.index";
    if (fs::exists(index_path)) {
      std::istringstream in(detail::slurp(index_path));
      std::string header;
      std::getline(in, header);
      if (header == stamp) {
        std::size_t k;
        while (in >> k) done.insert(k);
      }
    }
    if (done.empty()) detail::spit(index_path, stamp + "\n");

    std::vector<PointResult> results;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (done.count(k) && fs::exists(fragment(k, "sweep"))) continue;
      auto r = run_point(cfg_, points[k], k, policies_);
      const auto f = render_point(to_string(kind_), r);
      detail::spit(fragment(k, "runs"), f.runs);
      detail::spit(fragment(k, "stations"), f.stations);
      detail::spit(fragment(k, "sweep"), f.sweep);
      std::ofstream(index_path, std::ios::app) << k << "\n";
      results.push_back(std::move(r));
      if (progress && !progress(k, results.back())) return results;
    }

    std::string runs(kRunsCsvHeader), stations(kStationsCsvHeader), sweep(kSweepCsvHeader);
    for (std::size_t k = 0; k < points.size(); ++k) {
      runs += detail::slurp(fragment(k, "runs"));
      stations += detail::slurp(fragment(k, "stations"));
      sweep += detail::slurp(fragment(k, "sweep"));
    }
    detail::spit(out_ / "runs.csv", runs);
    detail::spit(out_ / "stations.csv", stations);
    detail::spit(out_ / "sweep.csv", sweep);
    return results;
  }

 private:
  std::filesystem::path fragment(std::size_t k, const char* what) const {
    return out_ / "points" / (std::to_string(k) + "." + what + ".csv");
  }

  // A resumed sweep must match the one that wrote the index.
  std::string index_stamp() const {
    std::string s = std::string("sweep ") + to_string(kind_) + " digest " + config_digest(cfg_) + " seed " +
                    std::to_string(cfg_.sim.base_seed) + " policies";
    for (auto p : policies_) s += std::string(" ") + policy_name(p);
    return s;
  }

  SimConfig cfg_;
  SweepKind kind_;
  std::filesystem::path out_;
  std::vector<PolicyKind> policies_;
};

}  // namespace edgefed
