#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sensorplace/errors.hpp"
#include "sensorplace/snapshot_io.hpp"
#include "sensorplace/snapshots.hpp"
#include "test_util.hpp"

using namespace sensorplace;

namespace {

SnapshotMatrix random_snapshots(Index n, std::size_t cases, std::size_t steps, std::uint64_t seed) {
  SnapshotMatrix m;
  m.values = oracle::random_matrix(n, static_cast<Index>(cases * steps), seed);
  m.n_cases = cases;
  m.steps_per_case = steps;
  return m;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST(InclusiveRange, KeepsEndpoints) {
  EXPECT_EQ(inclusive_range(-10, 0.01, 10).size(), 2001u);
  const auto sigmas = inclusive_range(0.5, 0.2, 6.5);
  ASSERT_EQ(sigmas.size(), 31u);
  EXPECT_NEAR(sigmas.back(), 6.5, 1e-12);
  EXPECT_THROW(inclusive_range(0, 0, 1), InvalidArgument);
}

TEST(GenerateGaussian, DemoShape) {
  const auto m = generate_gaussian_dataset(-10, 10, 0.01, {-2, 3}, inclusive_range(0.5, 0.2, 6.5));
  EXPECT_EQ(m.snapshots(), 62);
  EXPECT_EQ(m.nodes(), 2001);
  EXPECT_EQ(m.n_cases, 62u);
  EXPECT_EQ(m.steps_per_case, 1u);
  ASSERT_TRUE(m.has_coords());
  EXPECT_DOUBLE_EQ(m.coords(0, 0), -10.0);
  EXPECT_NEAR(m.coords(2000, 0), 10.0, 1e-12);
}

TEST(GenerateGaussian, StandardNormalIsSymmetricWithKnownPeak) {
  const auto m = generate_gaussian_dataset(-5, 5, 1, {0}, {1});
  ASSERT_EQ(m.nodes(), 11);
  for (Index i = 0; i < 11; ++i) EXPECT_DOUBLE_EQ(m.values(i, 0), m.values(10 - i, 0));
  EXPECT_DOUBLE_EQ(m.values(5, 0), 1.0 / std::sqrt(2.0 * std::numbers::pi));
}

TEST(GenerateGaussian, ColumnsIntegrateToOne) {
  const auto m = generate_gaussian_dataset(-10, 10, 0.01, {-2, 3}, inclusive_range(0.5, 0.2, 6.5));
  // Mass outside [-10, 10] for mu = 3, sigma = 6.5 is ~0.14, so only the
  // narrow profiles are fully resolved on this grid.
  for (Index j = 0; j < m.snapshots(); ++j) {
    const double sigma = 0.5 + 0.2 * static_cast<double>(j % 31);
    const double mu = j < 31 ? -2.0 : 3.0;
    const double inside = 0.5 * (std::erf((10 - mu) / (sigma * std::sqrt(2.0))) -
                                 std::erf((-10 - mu) / (sigma * std::sqrt(2.0))));
    EXPECT_NEAR(oracle::trapezoid(m.values.col(j), 0.01), inside, 1e-3) << "column " << j;
    if (sigma <= 2.0) {
      EXPECT_NEAR(oracle::trapezoid(m.values.col(j), 0.01), 1.0, 1e-3);
    }
  }
}

TEST(GenerateGaussian, ColumnOrderIsMeanOuter) {
  const auto m = generate_gaussian_dataset(-3, 3, 0.5, {-1, 1}, {0.5, 1.0});
  const auto a = generate_gaussian_dataset(-3, 3, 0.5, {1}, {0.5});
  EXPECT_EQ(m.values.col(2), a.values.col(0));
  EXPECT_EQ(m.values, generate_gaussian_dataset(-3, 3, 0.5, {-1, 1}, {0.5, 1.0}).values);
}

TEST(GenerateGaussian, RejectsBadParameters) {
  EXPECT_THROW(generate_gaussian_dataset(-1, 1, 0.1, {}, {1}), InvalidArgument);
  EXPECT_THROW(generate_gaussian_dataset(-1, 1, 0.1, {0}, {}), InvalidArgument);
  EXPECT_THROW(generate_gaussian_dataset(-1, 1, 0.1, {0}, {0.0}), InvalidArgument);
  EXPECT_THROW(generate_gaussian_dataset(1, -1, 0.1, {0}, {1}), InvalidArgument);
  EXPECT_THROW(generate_gaussian_dataset(-1, 1, -0.1, {0}, {1}), InvalidArgument);
}

TEST(Center, IdenticalColumnsGiveZeros) {
  SnapshotMatrix m;
  m.values = Eigen::Vector3d(1, 2, 3).replicate(1, 4);
  m.n_cases = 4;
  const auto c = center(m);
  EXPECT_TRUE(c.fluctuations.values.isZero(0.0));
  EXPECT_EQ(c.mean.values, Eigen::Vector3d(1, 2, 3));
}

TEST(Center, TwoColumnArithmetic) {
  SnapshotMatrix m;
  m.values = Eigen::RowVector2d(1, 3);
  m.n_cases = 2;
  const auto c = center(m);
  EXPECT_EQ(c.fluctuations.values, Eigen::RowVector2d(-1, 1));
  EXPECT_EQ(c.mean.values(0), 2.0);
}

TEST(Center, RowSumsVanishAndUncenterRestores) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_snapshots(20, 9, 1, seed);
    const auto c = center(m);
    const double scale = m.values.norm();
    EXPECT_LE(c.fluctuations.values.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_LE((uncenter(c.fluctuations.values, c.mean) - m.values).cwiseAbs().maxCoeff(),
              1e-14 * scale);
  }
}

TEST(Split, PaperCaseCounts) {
  const auto m = generate_gaussian_dataset(-10, 10, 0.01, {-2, 3}, inclusive_range(0.5, 0.2, 6.5));
  const auto s = split(m, 56.0 / 62.0, 7);
  EXPECT_EQ(s.train_indices.size(), 56u);
  EXPECT_EQ(s.test_indices.size(), 6u);
}

TEST(Split, TwoCasesHalf) {
  const auto m = random_snapshots(3, 2, 1, 1);
  const auto s = split(m, 0.5, 3);
  EXPECT_EQ(s.train_cases.size(), 1u);
  EXPECT_EQ(s.test_cases.size(), 1u);
}

TEST(Split, ClampsToNonEmptySides) {
  const auto m = random_snapshots(3, 5, 1, 1);
  EXPECT_EQ(split(m, 0.01, 1).train_cases.size(), 1u);
  EXPECT_EQ(split(m, 0.99, 1).test_cases.size(), 1u);
  EXPECT_THROW(split(m, 0.0, 1), InvalidArgument);
  EXPECT_THROW(split(m, 1.0, 1), InvalidArgument);
}

TEST(Split, DeterministicPerSeed) {
  const auto m = random_snapshots(3, 40, 1, 1);
  EXPECT_EQ(split(m, 0.85, 11), split(m, 0.85, 11));
  EXPECT_NE(split(m, 0.85, 11).train_cases, split(m, 0.85, 12).train_cases);
}

TEST(Split, PartitionsWholeCases) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t cases = 2 + seed % 9, steps = 1 + seed % 4;
    const auto m = random_snapshots(2, cases, steps, seed);
    const auto s = split(m, 0.1 + 0.8 * static_cast<double>(seed % 7) / 6.0, seed);
    std::set<Index> all(s.train_indices.begin(), s.train_indices.end());
    for (auto i : s.test_indices) EXPECT_TRUE(all.insert(i).second) << "column on both sides";
    EXPECT_EQ(all.size(), cases * steps);
    for (auto c : s.train_cases)
      for (std::size_t t = 0; t < steps; ++t)
        EXPECT_TRUE(std::count(s.train_indices.begin(), s.train_indices.end(), m.column(c, t)));
    EXPECT_FALSE(s.train_cases.empty());
    EXPECT_FALSE(s.test_cases.empty());
  }
}

TEST(CaseVariance, IdenticalCasesHaveZeroVariance) {
  SnapshotMatrix m;
  m.values = Eigen::RowVector3d(4, 5, 6).replicate(1, 3);  // 3 cases x 3 steps
  m.n_cases = 3;
  m.steps_per_case = 3;
  const auto v = case_variance(m, 0);
  EXPECT_TRUE(v.per_step_variance.isZero(0.0));
  EXPECT_EQ(v.per_step_mean, Eigen::Vector3d(4, 5, 6));
}

TEST(CaseVariance, PopulationFormula) {
  SnapshotMatrix m;
  m.values = Eigen::RowVector2d(1, 3);
  m.n_cases = 2;
  const auto v = case_variance(m, 0);
  EXPECT_DOUBLE_EQ(v.per_step_mean(0), 2.0);
  EXPECT_DOUBLE_EQ(v.per_step_variance(0), 1.0);
  EXPECT_EQ(v.n_cases, 2u);
}

TEST(CaseVariance, MatchesTwoPassOracle) {
  const auto m = random_snapshots(1, 4, 5, 99);
  const auto v = case_variance(m, 0);
  for (std::size_t t = 0; t < 5; ++t) {
    std::vector<double> xs;
    for (std::size_t c = 0; c < 4; ++c) xs.push_back(m.values(0, m.column(c, t)));
    EXPECT_NEAR(v.per_step_variance(static_cast<Index>(t)), oracle::two_pass_variance(xs), 1e-12);
  }
}

TEST(CaseVariance, ShiftInvariantAndNonNegative) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto m = random_snapshots(3, 6, 4, seed);
    const auto before = case_variance(m, 1);
    EXPECT_GE(before.per_step_variance.minCoeff(), 0.0);
    m.values.array() += 1000.0;
    const auto after = case_variance(m, 1);
    EXPECT_TRUE(before.per_step_variance.isApprox(after.per_step_variance, 1e-9));
  }
}

TEST(CaseVariance, RejectsBadIndex) {
  const auto m = random_snapshots(3, 2, 2, 1);
  EXPECT_THROW(case_variance(m, 3), InvalidArgument);
  EXPECT_THROW(case_variance(m, -1), InvalidArgument);
}

TEST(SnapshotIo, CsvOfZeros) {
  const auto dir = scratch_dir();
  write_file(dir / "z.csv", "node_id,snap_0,snap_1,snap_2\n0,0,0,0\n1,0.0,0,0\n");
  const auto m = load_snapshots(dir / "z.csv", SnapshotFormat::csv);
  EXPECT_EQ(m.nodes(), 2);
  EXPECT_EQ(m.snapshots(), 3);
  EXPECT_TRUE(m.values.isZero(0.0));
  EXPECT_EQ(m.n_cases, 3u);
}

TEST(SnapshotIo, DeclaredRowCountMismatch) {
  const auto dir = scratch_dir();
  write_file(dir / "m.csv",
             "# n_nodes=4 n_cases=2 steps_per_case=1\nnode_id,snap_0,snap_1\n0,1,2\n1,3,4\n2,5,6\n");
  EXPECT_THROW(load_snapshots_csv(dir / "m.csv"), ParseError);
}

TEST(SnapshotIo, ErrorsNameTheCell) {
  const auto dir = scratch_dir();
  write_file(dir / "bad.csv", "node_id,snap_0,snap_1\n0,1,2\n1,3,nan\n");
  try {
    load_snapshots_csv(dir / "bad.csv");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 3u);
  }
  write_file(dir / "word.csv", "node_id,snap_0\n0,abc\n");
  EXPECT_THROW(load_snapshots_csv(dir / "word.csv"), ParseError);
  write_file(dir / "header.csv", "id,snap_0\n0,1\n");
  EXPECT_THROW(load_snapshots_csv(dir / "header.csv"), ParseError);
  write_file(dir / "ragged.csv", "node_id,snap_0,snap_1\n0,1\n");
  EXPECT_THROW(load_snapshots_csv(dir / "ragged.csv"), ParseError);
  write_file(dir / "meta.csv", "# n_cases=3 steps_per_case=1\nnode_id,snap_0,snap_1\n0,1,2\n");
  EXPECT_THROW(load_snapshots_csv(dir / "meta.csv"), ParseError);
}

TEST(SnapshotIo, CsvWithCoordinatesAndMetadata) {
  const auto dir = scratch_dir();
  write_file(dir / "c.csv",
             "# n_cases=2 steps_per_case=2\nnode_id,x,y,snap_0,snap_1,snap_2,snap_3\n"
             "a,0.5,1.5,1,2,3,4\nb,-1,2,5,6,7,8\n");
  const auto m = load_snapshots_csv(dir / "c.csv");
  EXPECT_EQ(m.coords.cols(), 2);
  EXPECT_EQ(m.coords(1, 0), -1.0);
  EXPECT_EQ(m.node_ids[1], "b");
  EXPECT_EQ(m.steps_per_case, 2u);
  EXPECT_EQ(m.values(1, 3), 8.0);

  save_snapshots_csv(m, dir / "again.csv");
  const auto back = load_snapshots_csv(dir / "again.csv");
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.coords, m.coords);
  EXPECT_EQ(back.node_ids, m.node_ids);
}

TEST(SnapshotIo, BinaryRoundTripIsBitwise) {
  const auto dir = scratch_dir();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = random_snapshots(10, 7, 1, seed);
    if (seed % 2) m.coords = oracle::random_matrix(10, 1 + static_cast<Index>(seed % 3), seed + 50);
    save_snapshots_binary(m, dir / "r.bin");
    const auto back = load_snapshots(dir / "r.bin", SnapshotFormat::packed_binary);
    EXPECT_EQ(std::memcmp(back.values.data(), m.values.data(), sizeof(double) * 70), 0);
    EXPECT_EQ(back.coords, m.coords);
    EXPECT_EQ(back.n_cases, 7u);
  }
}

TEST(SnapshotIo, BinaryRejectsTruncationAndBadMagic) {
  const auto dir = scratch_dir();
  save_snapshots_binary(random_snapshots(4, 3, 1, 1), dir / "r.bin");
  std::filesystem::resize_file(dir / "r.bin", std::filesystem::file_size(dir / "r.bin") - 8);
  EXPECT_THROW(load_snapshots_binary(dir / "r.bin"), ParseError);
  write_file(dir / "junk.bin", "NOTMAGIC and more");
  EXPECT_THROW(load_snapshots_binary(dir / "junk.bin"), ParseError);
}

TEST(SnapshotIo, SidecarCoordinates) {
  const auto dir = scratch_dir();
  const auto gen = generate_gaussian_dataset(-1, 1, 0.5, {0}, {1, 2});
  auto bare = gen;
  bare.coords.resize(0, 0);
  save_snapshots_binary(bare, dir / "d.bin");
  save_coords_csv(gen, coords_sidecar_path(dir / "d.bin"));
  EXPECT_EQ(coords_sidecar_path(dir / "d.bin").filename(), "d.coords.csv");
  const auto m = load_snapshots_binary(dir / "d.bin");
  ASSERT_TRUE(m.has_coords());
  EXPECT_EQ(m.coords, gen.coords);

  write_file(coords_sidecar_path(dir / "d.bin"), "node_id,x\n0,1\n");
  EXPECT_THROW(load_snapshots_binary(dir / "d.bin"), ParseError);
}
