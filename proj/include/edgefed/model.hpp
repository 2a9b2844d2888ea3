#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgefed/stochastic.hpp"

namespace edgefed {

using TaskId = std::int64_t;

struct Position {
  double x{0.0};
  double y{0.0};
  friend bool operator==(const Position&, const Position&) = default;
};

enum class TaskStatus { Pending, Transferring, Queued, Executing, CompletedOnTime, CompletedLate, Dropped };

inline const char* to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Pending: return "Pending";
    case TaskStatus::Transferring: return "Transferring";
    case TaskStatus::Queued: return "Queued";
    case TaskStatus::Executing: return "Executing";
    case TaskStatus::CompletedOnTime: return "CompletedOnTime";
    case TaskStatus::CompletedLate: return "CompletedLate";
    case TaskStatus::Dropped: return "Dropped";
  }
  return "?";
}

// One vehicular service request. Lengths in MI, data sizes in megabits,
// times in absolute simulation seconds.
struct Task {
  TaskId id{0};
  TaskTypeId type_id{0};
  double length{0.0};
  double data_size_up{0.0};
  double data_size_down{0.0};
  bool urgent{false};
  Position origin_position{};
  Seconds arrival_time{0.0};
  Seconds deadline{0.0};
  StationId receiving_station{-1};
  StationId executing_station{-1};
  TaskStatus status{TaskStatus::Pending};
};

struct TaskTypeSpec {
  TaskTypeId type_id{0};
  std::string name;
  bool urgent{false};
  double length_min{0.0};
  double length_max{0.0};
  double data_size_up{0.0};
  double data_size_down{0.0};
  Seconds slack{0.0};
  double requests_per_vehicle_per_hour{0.0};

  double mean_length() const { return 0.5 * (length_min + length_max); }

  friend bool operator==(const TaskTypeSpec&, const TaskTypeSpec&) = default;
};

// Static description of one Base Station.
struct StationSpec {
  StationId id{0};
  Position position{};
  int core_count{0};
  double mips_per_core{0.0};
  std::vector<StationId> neighbor_ids;

  friend bool operator==(const StationSpec&, const StationSpec&) = default;
};

// Vehicle<->station WLAN and inter-station LAN. Bandwidths in megabits/s.
// lan_bandwidth == 0 means the LAN hop costs exactly lan_transfer_delay.
struct NetworkModel {
  double wlan_bandwidth{200.0};
  Seconds lan_transfer_delay{2.0};
  double lan_bandwidth{0.0};

  bool valid() const { return wlan_bandwidth > 0.0 && lan_transfer_delay >= 0.0 && lan_bandwidth >= 0.0; }

  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

inline Seconds uplink_delay(const Task& task, const NetworkModel& net) {
  return task.data_size_up / net.wlan_bandwidth;
}

inline Seconds downlink_delay(const Task& task, const NetworkModel& net) {
  return task.data_size_down / net.wlan_bandwidth;
}

// Realized inter-station hop for a payload of the given size.
inline Seconds lan_transfer_time(double data_size, const NetworkModel& net) {
  return net.lan_transfer_delay + (net.lan_bandwidth > 0.0 ? data_size / net.lan_bandwidth : 0.0);
}

// arrival + reference completion time + slack + (uplink + downlink).
inline Seconds compute_deadline(const Task& task, Seconds e_ref, Seconds slack, const NetworkModel& net) {
  return task.arrival_time + e_ref + slack + (uplink_delay(task, net) + downlink_delay(task, net));
}

inline Seconds service_time(const Task& task, const StationSpec& station) {
  return task.length / station.mips_per_core;
}

}  // namespace edgefed
