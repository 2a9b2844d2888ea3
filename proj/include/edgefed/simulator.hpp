#pragma once

// Discrete-event simulation of a Base Station federation.
//
// Timeline of one task: the vehicle issues it at arrival_time, the upload
// reaches the receiving station after the uplink delay, and that station's
// load balancer decides at once. A transfer costs one LAN hop; the task then
// waits in the executing station's FCFS queue, runs on one core, and the
// result returns over the downlink. A task is on time iff the result reaches
// the vehicle by its deadline.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefed/config.hpp"
#include "edgefed/heuristics.hpp"
#include "edgefed/metrics.hpp"
#include "edgefed/model.hpp"
#include "edgefed/stochastic.hpp"
#include "edgefed/workload.hpp"

namespace edgefed {

// Lower value runs first among events with equal timestamps.
enum class EventKind : int {
  ExecutionComplete = 0,
  TransferComplete = 1,
  ExecutionStart = 2,
  TaskArrival = 3,
  MatrixRefresh = 4,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::TaskArrival: return "TaskArrival";
    case EventKind::TransferComplete: return "TransferComplete";
    case EventKind::ExecutionStart: return "ExecutionStart";
    case EventKind::ExecutionComplete: return "ExecutionComplete";
    case EventKind::MatrixRefresh: return "MatrixRefresh";
  }
  return "?";
}

struct SimEvent {
  Seconds time{0.0};
  EventKind kind{EventKind::TaskArrival};
  std::uint64_t seq{0};
  TaskId task{-1};
  StationId station{-1};
  int core{-1};
};

// What the trace sink sees after each event has been applied.
struct TraceEvent {
  Seconds time;
  EventKind kind;
  TaskId task;
  StationId station;
  TaskStatus status;
  Seconds scheduled_at;  // time of the event that created this one

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// time, kind, task_id, station_id, status; tab separated.
inline std::string format_trace_event(const TraceEvent& e) {
  std::string out = detail::fmt_num(e.time);
  out += '\t';
  out += to_string(e.kind);
  out += '\t';
  out += std::to_string(e.task);
  out += '\t';
  out += std::to_string(e.station);
  out += '\t';
  out += e.kind == EventKind::MatrixRefresh ? "-" : to_string(e.status);
  out += '\n';
  return out;
}

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-task bookkeeping the report and the invariants need.
struct TaskRecord {
  Seconds enqueue_time{NAN};
  Seconds start_time{NAN};
  Seconds completion_time{NAN};
  Seconds e2e_delay{NAN};
  bool transferred{false};
};

class Simulator {
 public:
  using TraceSink = std::function<void(const TraceEvent&)>;

  Simulator(SimConfig cfg, std::vector<Task> tasks, TraceSink sink = {})
      : cfg_(std::move(cfg)), tasks_(std::move(tasks)), records_(tasks_.size()), sink_(std::move(sink)),
        etc_(ProfileKind::ETC, cfg_.sim.history_window) {
    validate(cfg_);
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (tasks_[i].id != static_cast<TaskId>(i)) throw SimulationError("task ids must be 0..n-1 in order");
    }
    bootstrap();
  }

  MetricsReport run() {
    if (ran_) throw SimulationError("a Simulator instance runs once");
    ran_ = true;

    for (const auto& t : tasks_) {
      if (t.receiving_station < 0 || t.receiving_station >= static_cast<StationId>(stations_.size())) {
        throw SimulationError("task " + std::to_string(t.id) + " has no valid receiving station");
      }
      schedule(t.arrival_time + uplink_delay(t, cfg_.network), EventKind::TaskArrival, t.id, t.receiving_station, -1,
               t.arrival_time);
    }
    const double cadence = std::ceil(static_cast<double>(tasks_.size()) * cfg_.sim.refresh_fraction);
    refresh_every_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(cadence));
    if (cfg_.sim.refresh_mode == RefreshMode::WallClock && !tasks_.empty()) {
      schedule(cfg_.sim.refresh_interval, EventKind::MatrixRefresh, -1, -1, -1, 0.0);
    }

    while (!events_.empty()) {
      const auto [ev, origin] = events_.top();
      events_.pop();
      if (ev.time < now_) throw SimulationError("event queue went back in time");
      now_ = ev.time;
      process(ev, origin);
    }
    return report();
  }

  const SimConfig& config() const { return cfg_; }
  const std::vector<Task>& tasks() const { return tasks_; }
  const std::vector<TaskRecord>& records() const { return records_; }
  const ProfileMatrix& etc() const { return etc_; }
  const ProfileMatrix& ett(StationId s) const { return stations_.at(static_cast<std::size_t>(s)).ett; }
  int refresh_count() const { return refreshes_; }

 private:
  struct StationState {
    const StationSpec* spec{nullptr};
    std::deque<TaskId> queue;
    std::vector<Seconds> vm_busy_until;
    std::vector<bool> vm_busy;
    ProfileMatrix ett;
  };

  struct Queued {
    SimEvent ev;
    Seconds origin;
  };
  struct Later {
    bool operator()(const Queued& a, const Queued& b) const {
      if (a.ev.time != b.ev.time) return a.ev.time > b.ev.time;
      if (a.ev.kind != b.ev.kind) return static_cast<int>(a.ev.kind) > static_cast<int>(b.ev.kind);
      return a.ev.seq > b.ev.seq;
    }
  };

  void bootstrap() {
    stations_.resize(cfg_.stations.size());
    for (std::size_t i = 0; i < cfg_.stations.size(); ++i) {
      auto& st = stations_[i];
      st.spec = &cfg_.stations[i];
      st.vm_busy_until.assign(static_cast<std::size_t>(st.spec->core_count), 0.0);
      st.vm_busy.assign(static_cast<std::size_t>(st.spec->core_count), false);
      st.ett = ProfileMatrix(ProfileKind::ETT, cfg_.sim.history_window);
    }
    const double k = cfg_.sim.prior_sigma_fraction;
    for (const auto& type : cfg_.task_types) {
      for (auto& st : stations_) {
        const Seconds etc_mean = type.mean_length() / st.spec->mips_per_core;
        etc_.bootstrap(type.type_id, st.spec->id, {etc_mean, k * etc_mean});
        const Seconds ett_mean = lan_transfer_time(type.data_size_up, cfg_.network);
        for (StationId n : st.spec->neighbor_ids) st.ett.bootstrap(type.type_id, n, {ett_mean, k * ett_mean});
      }
    }
  }

  void schedule(Seconds t, EventKind kind, TaskId task, StationId station, int core, Seconds origin) {
    events_.push({SimEvent{t, kind, next_seq_++, task, station, core}, origin});
  }

  void emit(const SimEvent& ev, Seconds origin) {
    if (!sink_) return;
    const TaskStatus status = ev.task >= 0 ? tasks_[static_cast<std::size_t>(ev.task)].status : TaskStatus::Pending;
    sink_(TraceEvent{ev.time, ev.kind, ev.task, ev.station, status, origin});
  }

  void process(const SimEvent& ev, Seconds origin) {
    switch (ev.kind) {
      case EventKind::TaskArrival: on_arrival(ev); break;
      case EventKind::TransferComplete: on_transfer_complete(ev); break;
      case EventKind::ExecutionStart: tasks_[static_cast<std::size_t>(ev.task)].status = TaskStatus::Executing; break;
      case EventKind::ExecutionComplete: on_execution_complete(ev); break;
      case EventKind::MatrixRefresh: on_refresh(); break;
    }
    emit(ev, origin);
  }

  void on_arrival(const SimEvent& ev) {
    auto& task = tasks_[static_cast<std::size_t>(ev.task)];
    auto& recv = stations_[static_cast<std::size_t>(task.receiving_station)];
    const AllocationContext ctx{task, task.receiving_station, recv.spec->neighbor_ids, etc_, recv.ett, now_};
    const auto decision = allocate(cfg_.sim.policy, ctx, cfg_.policy_options());
    dispatch(task, decision);
  }

  void dispatch(Task& task, const AllocationDecision& decision) {
    if (decision.dropped()) {
      task.status = TaskStatus::Dropped;
      return;
    }
    const StationId target = decision.target;
    const auto& nbrs = stations_[static_cast<std::size_t>(task.receiving_station)].spec->neighbor_ids;
    if (target == task.receiving_station) {
      enqueue(task, target);
      step_station(target);
      return;
    }
    if (std::find(nbrs.begin(), nbrs.end(), target) == nbrs.end()) {
      throw SimulationError("decision for task " + std::to_string(task.id) + " targets station " +
                            std::to_string(target) + ", which is not a neighbor of " +
                            std::to_string(task.receiving_station));
    }
    task.status = TaskStatus::Transferring;
    task.executing_station = target;
    records_[static_cast<std::size_t>(task.id)].transferred = true;
    ++transfers_;
    schedule(now_ + lan_transfer_time(task.data_size_up, cfg_.network), EventKind::TransferComplete, task.id, target,
             -1, now_);
  }

  void on_transfer_complete(const SimEvent& ev) {
    auto& task = tasks_[static_cast<std::size_t>(ev.task)];
    auto& recv = stations_[static_cast<std::size_t>(task.receiving_station)];
    recv.ett.record_sample(task.type_id, ev.station, lan_transfer_time(task.data_size_up, cfg_.network));
    enqueue(task, ev.station);
    step_station(ev.station);
  }

  void enqueue(Task& task, StationId s) {
    task.status = TaskStatus::Queued;
    task.executing_station = s;
    records_[static_cast<std::size_t>(task.id)].enqueue_time = now_;
    stations_[static_cast<std::size_t>(s)].queue.push_back(task.id);
  }

  // Starts queued tasks on free cores in FCFS order.
  void step_station(StationId s) {
    auto& st = stations_[static_cast<std::size_t>(s)];
    for (std::size_t core = 0; core < st.vm_busy.size() && !st.queue.empty(); ++core) {
      if (st.vm_busy[core]) continue;
      const TaskId id = st.queue.front();
      st.queue.pop_front();
      const auto& task = tasks_[static_cast<std::size_t>(id)];
      const Seconds done = now_ + service_time(task, *st.spec);
      st.vm_busy[core] = true;
      st.vm_busy_until[core] = done;
      records_[static_cast<std::size_t>(id)].start_time = now_;
      schedule(now_, EventKind::ExecutionStart, id, s, static_cast<int>(core), now_);
      schedule(done, EventKind::ExecutionComplete, id, s, static_cast<int>(core), now_);
    }
  }

  void on_execution_complete(const SimEvent& ev) {
    auto& task = tasks_[static_cast<std::size_t>(ev.task)];
    auto& st = stations_[static_cast<std::size_t>(ev.station)];
    st.vm_busy[static_cast<std::size_t>(ev.core)] = false;

    auto& rec = records_[static_cast<std::size_t>(task.id)];
    rec.completion_time = now_;
    etc_.record_sample(task.type_id, ev.station, now_ - rec.enqueue_time);

    Seconds delivered = now_ + downlink_delay(task, cfg_.network);
    if (rec.transferred && cfg_.sim.downlink_via_receiving) delivered += lan_transfer_time(task.data_size_down, cfg_.network);
    rec.e2e_delay = delivered - task.arrival_time;
    task.status = delivered <= task.deadline ? TaskStatus::CompletedOnTime : TaskStatus::CompletedLate;

    ++completions_;
    if (cfg_.sim.refresh_mode == RefreshMode::TaskCount && completions_ % refresh_every_ == 0) {
      schedule(now_, EventKind::MatrixRefresh, -1, -1, -1, now_);
    }
    step_station(ev.station);
  }

  void on_refresh() {
    etc_.refresh();
    for (auto& st : stations_) st.ett.refresh();
    ++refreshes_;
    // Wall-clock cadence keeps ticking while other work is pending.
    if (cfg_.sim.refresh_mode == RefreshMode::WallClock && !events_.empty()) {
      schedule(now_ + cfg_.sim.refresh_interval, EventKind::MatrixRefresh, -1, -1, -1, now_);
    }
  }

  MetricsReport report() const {
    MetricsReport r;
    r.per_station.resize(stations_.size());
    std::vector<double> wait_sum(stations_.size(), 0.0), e2e_sum(stations_.size(), 0.0);
    for (const auto& t : tasks_) {
      auto& recv = r.per_station[static_cast<std::size_t>(t.receiving_station)];
      ++recv.received;
      if (t.status == TaskStatus::Dropped) {
        ++recv.dropped;
        continue;
      }
      const auto i = static_cast<std::size_t>(t.executing_station);
      auto& exec = r.per_station[i];
      const auto& rec = records_[static_cast<std::size_t>(t.id)];
      ++exec.executed;
      if (t.status == TaskStatus::CompletedOnTime) ++exec.completed_on_time;
      else if (t.status == TaskStatus::CompletedLate) ++exec.completed_late;
      else throw SimulationError("task " + std::to_string(t.id) + " never finished");
      wait_sum[i] += rec.start_time - rec.enqueue_time;
      e2e_sum[i] += rec.e2e_delay;
    }
    double total_wait = 0.0, total_e2e = 0.0;
    for (std::size_t i = 0; i < r.per_station.size(); ++i) {
      auto& s = r.per_station[i];
      if (s.executed > 0) {
        s.mean_queue_wait = wait_sum[i] / static_cast<double>(s.executed);
        s.mean_e2e_delay = e2e_sum[i] / static_cast<double>(s.executed);
      }
      r.system.received += s.received;
      r.system.executed += s.executed;
      r.system.completed_on_time += s.completed_on_time;
      r.system.completed_late += s.completed_late;
      r.system.dropped += s.dropped;
      total_wait += wait_sum[i];
      total_e2e += e2e_sum[i];
    }
    if (r.system.executed > 0) {
      r.system.mean_queue_wait = total_wait / static_cast<double>(r.system.executed);
      r.system.mean_e2e_delay = total_e2e / static_cast<double>(r.system.executed);
    }
    r.transfers = transfers_;
    r.policy_name = policy_name(cfg_.sim.policy);
    r.seed = cfg_.workload.seed;
    r.config_digest = config_digest(cfg_);
    r.vehicles = cfg_.workload.vehicle_count;
    r.urgent_fraction = cfg_.workload.urgent_fraction;
    return r;
  }

  SimConfig cfg_;
  std::vector<Task> tasks_;
  std::vector<TaskRecord> records_;
  TraceSink sink_;
  ProfileMatrix etc_;
  std::vector<StationState> stations_;
  std::priority_queue<Queued, std::vector<Queued>, Later> events_;
  std::uint64_t next_seq_{0};
  Seconds now_{0.0};
  std::int64_t completions_{0};
  std::int64_t refresh_every_{1};
  std::int64_t transfers_{0};
  int refreshes_{0};
  bool ran_{false};
};

// Simulates the given tasks (e.g. a replayed trace) under cfg.
inline MetricsReport run_tasks(const SimConfig& cfg, std::vector<Task> tasks, Simulator::TraceSink sink = {}) {
  Simulator sim(cfg, std::move(tasks), std::move(sink));
  return sim.run();
}

// Generates the workload for `seed` and simulates it.
inline MetricsReport run(SimConfig cfg, std::uint64_t seed, Simulator::TraceSink sink = {}) {
  validate(cfg);
  cfg.workload.seed = seed;
  auto tasks = generate(cfg);
  return run_tasks(cfg, std::move(tasks), std::move(sink));
}

}  // namespace edgefed
