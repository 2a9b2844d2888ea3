// edgefed: run one configuration or a full experiment sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "edgefed/config.hpp"
#include "edgefed/experiment.hpp"
#include "edgefed/simulator.hpp"
#include "edgefed/workload.hpp"

namespace fs = std::filesystem;
using namespace edgefed;

namespace {

struct Options {
  std::string config_path;
  std::string policy;
  int vehicles{-1};
  long long seed{-1};
  int trials{-1};
  std::string sweep;
  std::string out_dir{"out"};
  std::string trace_path;
  std::string events_path;
  bool dump_config{false};
};

SimConfig resolve_config(const Options& o) {
  SimConfig cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
  if (!o.policy.empty()) {
    auto p = parse_policy(o.policy);
    if (!p) throw ConfigValidationError("--policy", "unknown policy '" + o.policy + "' (expected bp, mect, mc or nr)");
    cfg.sim.policy = *p;
  }
  if (o.vehicles >= 0) cfg.workload.vehicle_count = o.vehicles;
  if (o.seed >= 0) cfg.sim.base_seed = static_cast<std::uint64_t>(o.seed);
  if (o.trials >= 0) cfg.sim.trials = o.trials;
  validate(cfg);
  return cfg;
}

int run_single(const SimConfig& cfg, const Options& o) {
  fs::create_directories(o.out_dir);

  std::optional<std::vector<TraceRecord>> replay;
  if (!o.trace_path.empty() && fs::exists(o.trace_path)) replay = load_trace(o.trace_path);

  std::string runs(kRunsCsvHeader), stations(kStationsCsvHeader);
  std::vector<MetricsReport> reports;
  for (int trial = 0; trial < cfg.sim.trials; ++trial) {
    SimConfig c = cfg;
    c.workload.seed = derive_seed(cfg.sim.base_seed, 0, static_cast<std::uint64_t>(trial));
    const auto trace = replay ? *replay : generate_trace(c);
    if (trial == 0 && !o.trace_path.empty() && !replay) save_trace(o.trace_path, trace);

    std::ofstream events;
    Simulator::TraceSink sink;
    if (trial == 0 && !o.events_path.empty()) {
      events.open(o.events_path, std::ios::binary);
      if (!events) throw std::runtime_error("cannot write '" + o.events_path + "'");
      sink = [&events](const TraceEvent& e) { events << format_trace_event(e); };
    }
    auto rep = run_tasks(c, make_tasks(trace, c), sink);
    runs += runs_csv_row(rep);
    stations += stations_csv_rows(rep);
    std::printf("%s seed=%llu tasks=%lld on_time=%lld late=%lld dropped=%lld transfers=%lld miss_rate=%s\n",
                rep.policy_name.c_str(), static_cast<unsigned long long>(rep.seed),
                static_cast<long long>(rep.generated()), static_cast<long long>(rep.system.completed_on_time),
                static_cast<long long>(rep.system.completed_late), static_cast<long long>(rep.system.dropped),
                static_cast<long long>(rep.transfers),
                rep.generated() ? detail::fmt_num(miss_rate(rep)).c_str() : "nan");
    reports.push_back(std::move(rep));
  }
  detail::spit(fs::path(o.out_dir) / "runs.csv", runs);
  detail::spit(fs::path(o.out_dir) / "stations.csv", stations);

  const auto agg = aggregate(reports);
  std::string sweep(kSweepCsvHeader);
  sweep += std::string("single,") + std::to_string(cfg.workload.vehicle_count) + "," +
           detail::fmt_fraction(cfg.workload.urgent_fraction) + "," + policy_name(cfg.sim.policy) + "," +
           std::to_string(reports.size()) + "," + detail::fmt_num(agg.mean_miss_rate) + "," +
           detail::fmt_num(agg.std_miss_rate) + "," + detail::fmt_num(agg.per_bs_mean_all) + "," +
           detail::fmt_num(agg.per_bs_mean_missing_only) + "\n";
  detail::spit(fs::path(o.out_dir) / "sweep.csv", sweep);
  return 0;
}

int run_sweep(const SimConfig& cfg, const Options& o) {
  const auto kind = parse_sweep(o.sweep);
  if (!kind) throw ConfigValidationError("--sweep", "expected vehicles, urgency or single-bs");
  SweepRunner runner(cfg, *kind, o.out_dir);
  runner.run([](std::size_t k, const PointResult& r) {
    std::printf("point %zu: vehicles=%d urgent_fraction=%s", k, r.point.vehicles,
                detail::fmt_fraction(r.point.urgent_fraction).c_str());
    for (std::size_t p = 0; p < r.policies.size(); ++p) {
      std::printf(" %s=%.4f", policy_name(r.policies[p]), aggregate(r.runs[p]).mean_miss_rate);
    }
    std::printf("\n");
    std::fflush(stdout);
    return true;
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate deadline-aware task allocation across a federation of edge Base Stations"};
  Options o;
  app.add_option("--config", o.config_path, "Config file (key = value with [sections])");
  app.add_option("--policy", o.policy, "Allocation policy: bp, mect, mc or nr");
  app.add_option("--vehicles", o.vehicles, "Vehicles per hour")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "Base seed")->check(CLI::NonNegativeNumber);
  app.add_option("--trials", o.trials, "Trials per point")->check(CLI::PositiveNumber);
  app.add_option("--sweep", o.sweep, "Experiment sweep: vehicles, urgency or single-bs");
  app.add_option("--out", o.out_dir, "Output directory for CSV files");
  app.add_option("--trace", o.trace_path, "Workload trace: replayed if the file exists, otherwise exported");
  app.add_option("--dump-events", o.events_path, "Write the event trace of the first run");
  app.add_flag("--dump-config", o.dump_config, "Print the resolved configuration and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    const SimConfig cfg = resolve_config(o);
    if (o.dump_config) {
      std::cout << dump_config(cfg);
      return 0;
    }
    if (!o.sweep.empty()) {
      if (!o.trace_path.empty() || !o.events_path.empty()) {
        std::cerr << "error: --trace and --dump-events apply to single runs, not sweeps\n";
        return 2;
      }
      return run_sweep(cfg, o);
    }
    return run_single(cfg, o);
  } catch (const ConfigFileError& e) {
    std::cerr << "config file error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigParseError& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigValidationError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
