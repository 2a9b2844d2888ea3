#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "edgefed/workload.hpp"

using namespace edgefed;

namespace {

SimConfig rate_config(double per_second, std::uint64_t seed) {
  SimConfig c = default_config();
  // one vehicle per 1/3600 task/s of aggregate rate
  for (auto& t : c.task_types) t.requests_per_vehicle_per_hour = 1.0;
  c.workload.vehicle_count = static_cast<int>(std::lround(per_second * 3600.0 / 4.0));
  c.workload.seed = seed;
  return c;
}

}  // namespace

TEST(Generate, ZeroVehiclesIsEmpty) {
  auto c = default_config();
  c.workload.vehicle_count = 0;
  EXPECT_TRUE(generate_trace(c).empty());
}

TEST(Generate, RequiresStations) {
  auto c = default_config();
  c.stations.clear();
  EXPECT_THROW(generate_trace(c), WorkloadError);
}

TEST(Generate, PoissonCountConcentration) {
  int inside = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto n = static_cast<double>(generate_trace(rate_config(1.0, s)).size());
    inside += std::abs(n - 3600.0) <= 180.0;
  }
  EXPECT_GE(inside, 97);
}

TEST(Generate, InterArrivalMean) {
  auto c = rate_config(1.0, 4);
  c.workload.duration = 110000.0;
  const auto tr = generate_trace(c);
  ASSERT_GE(tr.size(), 100000u);
  const double mean_gap = tr[99999].time / 100000.0;
  EXPECT_NEAR(mean_gap, 1.0, 0.02);
}

TEST(Generate, UrgentFractionIsHonored) {
  auto c = default_config();
  c.workload.urgent_fraction = 0.9;
  c.workload.vehicle_count = 4000;
  c.workload.seed = 31;
  const auto tasks = generate(c);
  ASSERT_GE(tasks.size(), 10000u);
  std::size_t urgent = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    const auto& t = tasks[i];
    EXPECT_EQ(t.urgent, c.task_types[static_cast<std::size_t>(t.type_id)].urgent);
    urgent += t.urgent;
  }
  const double share = static_cast<double>(urgent) / 10000.0;
  EXPECT_GE(share, 0.88);
  EXPECT_LE(share, 0.92);
}

TEST(Generate, CatalogMixFollowsRates) {
  auto c = default_config();
  c.task_types[3].requests_per_vehicle_per_hour = 0.0;
  c.workload.seed = 2;
  for (const auto& r : generate_trace(c)) EXPECT_NE(r.type_id, 3);
}

TEST(Generate, SortedDeterministicAndRoutedToNearest) {
  auto c = default_config();
  c.workload.vehicle_count = 1500;
  c.workload.seed = 99;
  const auto a = generate(c), b = generate(c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].arrival_time, b[i].arrival_time);
    EXPECT_EQ(a[i].origin_position, b[i].origin_position);
    if (i) {
      EXPECT_LE(a[i - 1].arrival_time, a[i].arrival_time);
    }
    const auto& t = a[i];
    EXPECT_GE(t.length, c.task_types[static_cast<std::size_t>(t.type_id)].length_min);
    EXPECT_LE(t.length, c.task_types[static_cast<std::size_t>(t.type_id)].length_max);
    EXPECT_GT(t.deadline, t.arrival_time);
    double best = INFINITY;
    StationId arg = -1;
    for (const auto& s : c.stations) {
      const double d = std::hypot(s.position.x - t.origin_position.x, s.position.y - t.origin_position.y);
      if (d < best) {
        best = d;
        arg = s.id;
      }
    }
    EXPECT_EQ(t.receiving_station, arg);
  }
  c.workload.seed = 100;
  EXPECT_NE(generate_trace(c), generate_trace(default_config()));
}

TEST(NearestStation, Examples) {
  std::vector<StationSpec> st{{0, {0, 0}, 2, 1, {}}, {1, {10, 0}, 2, 1, {}}};
  EXPECT_EQ(nearest_station({10, 0}, st), 1);
  EXPECT_EQ(nearest_station({3, 0}, st), 0);
  EXPECT_EQ(nearest_station({5, 0}, st), 0);
  std::vector<StationSpec> rev{{0, {10, 0}, 2, 1, {}}, {1, {0, 0}, 2, 1, {}}};
  EXPECT_EQ(nearest_station({5, 0}, rev), 0);
  EXPECT_THROW(nearest_station({0, 0}, std::vector<StationSpec>{}), WorkloadError);
}

TEST(Trace, RoundTripsExactly) {
  auto c = default_config();
  c.workload.vehicle_count = 300;
  const auto tr = generate_trace(c);
  const auto text = write_trace(tr);
  EXPECT_EQ(read_trace(text), tr);
  EXPECT_EQ(write_trace(read_trace(text)), text);
}

TEST(Trace, RejectsMalformedLines) {
  EXPECT_THROW(read_trace("1\t0\t2\t3\t4\t5\n"), WorkloadError);
  EXPECT_THROW(read_trace("1\t0\t2\t3\t4\t5\tx\n"), WorkloadError);
  EXPECT_THROW(read_trace("2\t0\t1\t1\t1\t1\t1\n1\t0\t1\t1\t1\t1\t1\n"), WorkloadError);
  EXPECT_TRUE(read_trace("# only a header\n").empty());
}

TEST(Trace, UnknownTypeIsRejectedWhenBuildingTasks) {
  const auto c = default_config();
  std::vector<TraceRecord> tr{{0.0, 9, 1.0, {0, 0}, 1, 1}};
  EXPECT_THROW(make_tasks(tr, c), WorkloadError);
}
