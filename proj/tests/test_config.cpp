#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "edgefed/config.hpp"

using namespace edgefed;

namespace {

template <typename E>
E expect_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const E& e) {
    return e;
  } catch (const std::exception& e) {
    ADD_FAILURE() << "wrong error type: " << e.what();
    throw;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  throw std::logic_error("unreachable");
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const auto c = parse_config("");
  ASSERT_EQ(c.stations.size(), 15u);
  int four = 0, two = 0;
  for (const auto& s : c.stations) {
    EXPECT_EQ(s.mips_per_core, 1600.0);
    (s.core_count == 4 ? four : two)++;
    EXPECT_FALSE(s.neighbor_ids.empty());
  }
  EXPECT_EQ(four, 8);
  EXPECT_EQ(two, 7);
  ASSERT_EQ(c.task_types.size(), 4u);
  EXPECT_EQ(std::count_if(c.task_types.begin(), c.task_types.end(), [](auto& t) { return t.urgent; }), 2);
  EXPECT_EQ(c.network.wlan_bandwidth, 200.0);
  EXPECT_EQ(c.network.lan_transfer_delay, 2.0);
  EXPECT_EQ(c.sim.refresh_fraction, 0.10);
  EXPECT_EQ(c.sim.drop_threshold, 1e-9);
  EXPECT_EQ(c.sim.trials, 20);
  EXPECT_EQ(c.sim.policy, PolicyKind::BestProbability);
  EXPECT_FALSE(c.workload.urgent_fraction.has_value());
}

TEST(Config, DefaultNeighborsAreGridAdjacent) {
  const auto c = default_config();
  // corner, edge and centre cells of the 5 x 3 grid
  EXPECT_EQ(c.stations[0].neighbor_ids, (std::vector<StationId>{1, 5}));
  EXPECT_EQ(c.stations[2].neighbor_ids, (std::vector<StationId>{1, 3, 7}));
  EXPECT_EQ(c.stations[7].neighbor_ids, (std::vector<StationId>{2, 6, 8, 12}));
}

TEST(Config, ZeroCoresNamesTheKey) {
  const auto e = expect_error<ConfigValidationError>("[station]\nx = 0\ny = 0\ncores = 0\n");
  EXPECT_EQ(e.key(), "station[0].cores");
}

TEST(Config, ValidationKeys) {
  EXPECT_EQ(expect_error<ConfigValidationError>("[network]\nwlan_bandwidth = 0\n").key(), "network.wlan_bandwidth");
  EXPECT_EQ(expect_error<ConfigValidationError>("[workload]\nurgent_fraction = 1.5\n").key(),
            "workload.urgent_fraction");
  EXPECT_EQ(expect_error<ConfigValidationError>("[simulation]\nrefresh_fraction = 0\n").key(),
            "simulation.refresh_fraction");
  EXPECT_EQ(expect_error<ConfigValidationError>("[simulation]\nbogus = 1\n").key(), "simulation.bogus");
}

TEST(Config, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(expect_error<ConfigParseError>("[network]\n\nwlan_bandwidth\n").line(), 3);
  EXPECT_EQ(expect_error<ConfigParseError>("[nowhere]\n").line(), 1);
  EXPECT_EQ(expect_error<ConfigParseError>("[network]\nlan_transfer_delay = 1\nlan_transfer_delay = 2\n").line(), 3);
  EXPECT_EQ(expect_error<ConfigParseError>("[network]\n[network]\n").line(), 2);
  EXPECT_EQ(expect_error<ConfigParseError>("vehicles = 3\n").line(), 1);
}

TEST(Config, MissingFileIsAFileError) {
  EXPECT_THROW(load_config("/nonexistent/edgefed.ini"), ConfigFileError);
}

TEST(Config, ErrorTypesAreDistinct) {
  bool file = false, parse = false, valid = false;
  try { load_config("/nonexistent/x.ini"); } catch (const ConfigFileError&) { file = true; } catch (const ConfigError&) {}
  try { parse_config("[x"); } catch (const ConfigParseError&) { parse = true; } catch (const ConfigError&) {}
  try { parse_config("[workload]\nduration = -1\n"); } catch (const ConfigValidationError&) { valid = true; } catch (const ConfigError&) {}
  EXPECT_TRUE(file && parse && valid);
}

TEST(Config, ExplicitStationsAndTypes) {
  const auto c = parse_config(R"(
# two stations and one type
[topology]
neighbor_radius = 0

[station]
x = 0
y = 0
cores = 2

[station]
x = 9000
y = 0
mips = 800

[task_type]
name = probe
urgent = true
length_min = 10
length_max = 20
data_up = 1
data_down = 2
slack = 0.5
rate = 3

[workload]
urgent_fraction = 1
vehicles = 12
)");
  ASSERT_EQ(c.stations.size(), 2u);
  EXPECT_EQ(c.stations[1].core_count, 4);
  EXPECT_EQ(c.stations[1].mips_per_core, 800.0);
  EXPECT_EQ(c.stations[0].neighbor_ids, std::vector<StationId>{1});
  ASSERT_EQ(c.task_types.size(), 1u);
  EXPECT_EQ(c.task_types[0].name, "probe");
  EXPECT_EQ(c.workload.urgent_fraction, 1.0);
  EXPECT_EQ(c.workload.vehicle_count, 12);
}

TEST(Config, ExplicitNeighborsAreKept) {
  const auto c = parse_config("[station]\nx=0\ny=0\nneighbors = 2\n[station]\nx=1\ny=0\n[station]\nx=2\ny=0\n");
  EXPECT_EQ(c.stations[0].neighbor_ids, std::vector<StationId>{2});
  EXPECT_TRUE(c.stations[1].neighbor_ids.empty());
  EXPECT_THROW(parse_config("[station]\nx=0\ny=0\nneighbors = 0\n"), ConfigValidationError);
}

TEST(Config, DumpLoadRoundTrip) {
  auto c = default_config();
  c.sim.policy = PolicyKind::MaxCertainty;
  c.workload.urgent_fraction = 0.3;
  c.sim.history_window = 50;
  c.sim.refresh_mode = RefreshMode::WallClock;
  c.network.lan_bandwidth = 1000.0 / 3.0;
  c.stations[3].core_count = 8;
  EXPECT_EQ(parse_config(dump_config(c)), c);
  EXPECT_EQ(parse_config(dump_config(default_config())), default_config());

  const auto path = std::filesystem::temp_directory_path() / "edgefed_roundtrip.ini";
  std::ofstream(path) << dump_config(c);
  EXPECT_EQ(load_config(path.string()), c);
  std::filesystem::remove(path);
}

TEST(Config, DigestIgnoresSeedsAndPolicy) {
  auto a = default_config(), b = default_config();
  b.workload.seed = 77;
  b.sim.base_seed = 9;
  b.sim.policy = PolicyKind::NoRedirection;
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.workload.vehicle_count = 1;
  EXPECT_NE(config_digest(a), config_digest(b));
}
