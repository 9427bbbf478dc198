#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "pipeline.hpp"
#include "sensorplace/errors.hpp"
#include "sensorplace/placement_io.hpp"
#include "sensorplace/snapshot_io.hpp"
#include "test_util.hpp"

using namespace sensorplace;
using namespace sensorplace::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig demo(const std::filesystem::path& out) {
  PipelineConfig c;
  c.out_dir = out;
  return c;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(R"({"pod": {"rank": 5, "scaling": "unit"},
      "evaluate": {"noise_levels": [0, 0.1], "trials": 3}, "seed": 7, "out": "x"})");
  EXPECT_EQ(c.rank, Index{5});
  EXPECT_EQ(c.scaling, BasisScaling::unit);
  EXPECT_EQ(c.noise_levels, (std::vector<double>{0.0, 0.1}));
  EXPECT_EQ(c.trials, 3u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.out_dir, "x");
  EXPECT_EQ(c.train_fraction, 0.9);
  EXPECT_EQ(c.generator.sigmas.size(), 31u);
}

TEST(Config, RoundTripsThroughDump) {
  const auto c = parse_config(R"({"placement": {"min_distance": null, "sensors": 4}, "seed": 3})");
  const auto again = parse_config(dump_config(c));
  EXPECT_EQ(dump_config(again), dump_config(c));
  EXPECT_EQ(config_hash(again), config_hash(c));
  EXPECT_FALSE(again.min_distance.has_value());
  EXPECT_NE(config_hash(c), config_hash(PipelineConfig{}));
}

TEST(Config, Rejects) {
  EXPECT_THROW(parse_config("[1]"), ParseError);
  EXPECT_THROW(parse_config("{"), ParseError);
  EXPECT_THROW(parse_config(R"({"evaluate": {"trials": 0}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"evaluate": {"noise_levels": [-1]}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"pod": {"scaling": "tall"}})"), ParseError);
}

TEST(Generate, WritesDatasetAndCreatesDirectory) {
  const auto dir = scratch_dir() / "nested" / "out";
  std::ostringstream log;
  const auto path = cmd_generate(demo(dir), log);
  const auto m = load_snapshots(path, format_for_path(path));
  EXPECT_EQ(m.snapshots(), 62);
  EXPECT_EQ(m.n_cases, 62);
  EXPECT_EQ(m.steps_per_case, 1);
  EXPECT_EQ(m.nodes(), 2001);
  EXPECT_TRUE(m.has_coords());
  const auto first = slurp(path);
  cmd_generate(demo(dir), log);
  EXPECT_EQ(slurp(path), first);
}

TEST(Place, DemoRanksOneSensorPerMode) {
  const auto dir = scratch_dir();
  std::ostringstream log;
  const auto r = cmd_place(demo(dir), log);
  EXPECT_EQ(static_cast<Index>(r.sensors.size()), r.rank);
  EXPECT_GT(r.volume, 0.0);
  EXPECT_EQ(load_sensor_set(dir / "sensors.json"), r.sensors);
  EXPECT_NE(log.str().find("cumulative energy"), std::string::npos);
  EXPECT_EQ(log.str().find("warning"), std::string::npos);
}

TEST(Place, WarnsWhenUnderDetermined) {
  auto c = demo(scratch_dir());
  c.sensors = 2;
  std::ostringstream log;
  cmd_place(c, log);
  EXPECT_NE(log.str().find("under-determined"), std::string::npos);
}

TEST(Place, ConstrainedTwoDimensionalDataset) {
  const auto dir = scratch_dir();
  // 15 x 15 grid of radially travelling bumps.
  SnapshotMatrix m;
  const Index side = 15, n = side * side;
  m.n_cases = 8;
  m.steps_per_case = 3;
  m.values.resize(n, 24);
  m.coords.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    m.coords(i, 0) = static_cast<double>(i % side) / (side - 1);
    m.coords(i, 1) = static_cast<double>(i / side) / (side - 1);
    m.node_ids.push_back(std::to_string(i));
  }
  for (Index c = 0; c < 8; ++c)
    for (Index t = 0; t < 3; ++t) {
      const double cx = 0.2 + 0.08 * static_cast<double>(c), cy = 0.3 + 0.15 * static_cast<double>(t);
      for (Index i = 0; i < n; ++i) {
        const double dx = m.coords(i, 0) - cx, dy = m.coords(i, 1) - cy;
        m.values(i, m.column(c, t)) = std::exp(-(dx * dx + dy * dy) / 0.05);
      }
    }
  save_snapshots_binary(m, dir / "grid.bin");
  {
    std::ofstream out(dir / "forbid.json");
    out << R"({"forbidden_boxes": [{"min": [0.3, 0.3], "max": [0.7, 0.7]}], "min_distance": 0.15})";
  }
  auto cfg = demo(dir);
  cfg.dataset_path = dir / "grid.bin";
  cfg.constraints_path = dir / "forbid.json";
  cfg.min_distance.reset();
  cfg.train_fraction = 0.75;
  std::ostringstream log;
  const auto r = cmd_place(cfg, log);
  ASSERT_GT(r.sensors.size(), 0u);
  for (std::size_t a = 0; a < r.sensors.size(); ++a) {
    const auto ia = r.sensors.indices[a];
    const bool inside = m.coords(ia, 0) >= 0.3 && m.coords(ia, 0) <= 0.7 && m.coords(ia, 1) >= 0.3 &&
                        m.coords(ia, 1) <= 0.7;
    EXPECT_FALSE(inside) << "node " << ia;
    for (std::size_t b = a + 1; b < r.sensors.size(); ++b)
      EXPECT_GE((m.coords.row(ia) - m.coords.row(r.sensors.indices[b])).norm(), 0.15);
  }
}

TEST(Evaluate, SweepRowsAndReproducibility) {
  const auto dir = scratch_dir();
  auto cfg = demo(dir);
  cfg.rank = 5;
  cfg.sensor_counts = {5, 10};
  cfg.noise_levels = {0.0, 0.1, 0.2};
  cfg.trials = 10;
  std::ostringstream log;
  const auto report = cmd_evaluate(cfg, log);
  EXPECT_EQ(report.rows.size(), 12u);
  for (const auto* label : {"optimal_p5", "random_p5", "optimal_p10", "random_p10"})
    for (double level : {0.0, 0.1, 0.2}) EXPECT_NE(report.find(label, level), nullptr) << label;
  EXPECT_TRUE(std::filesystem::exists(dir / "coefficients.csv"));

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("rank").get<Index>(), 5);
  EXPECT_EQ(manifest.at("config_hash").get<std::string>(), config_hash(cfg));

  // The manifest doubles as a config that reproduces the run.
  const auto first = slurp(dir / "report.csv");
  auto again = load_config(dir / "manifest.json");
  EXPECT_EQ(config_hash(again), config_hash(cfg));
  cmd_evaluate(again, log);
  EXPECT_EQ(slurp(dir / "report.csv"), first);
}

TEST(ExitCodes, MapErrorTypes) {
  EXPECT_EQ(exit_code_for(ParseError("x")), kParseError);
  EXPECT_EQ(exit_code_for(InfeasibleError("x", 1)), kInfeasible);
  EXPECT_EQ(exit_code_for(IllConditionedError("x", 1e20)), kIllConditioned);
  EXPECT_EQ(exit_code_for(UnderdeterminedError("x")), kIllConditioned);
  // Bad option values surface as InvalidArgument and count as usage errors.
  EXPECT_EQ(exit_code_for(InvalidArgument("x")), kParseError);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kFailure);
}
