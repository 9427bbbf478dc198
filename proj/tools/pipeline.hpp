#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sensorplace/placement.hpp"
#include "sensorplace/pod.hpp"
#include "sensorplace/reconstruct.hpp"
#include "sensorplace/snapshots.hpp"

namespace sensorplace::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kInfeasible = 3,
  kIllConditioned = 4,
};

struct GeneratorConfig {
  double grid_min = -10.0;
  double grid_max = 10.0;
  double grid_step = 0.01;
  std::vector<double> means{-2.0, 3.0};
  std::vector<double> sigmas = inclusive_range(0.5, 0.2, 6.5);
};

/// Everything a run depends on. Defaults reproduce the Gaussian demo.
struct PipelineConfig {
  // dataset
  std::optional<std::filesystem::path> dataset_path;
  GeneratorConfig generator;
  // preprocessing
  bool center = true;
  double train_fraction = 0.9;
  // pod
  std::optional<Index> rank;
  double energy = 0.99;
  BasisScaling scaling = BasisScaling::sv_scaled;
  // placement
  std::optional<std::filesystem::path> constraints_path;
  std::optional<double> min_distance = 0.25;
  /// 0 means "one sensor per mode".
  Index sensors = 0;
  Index oversample_node_budget = 10'000;
  // evaluation
  /// Empty means {r, 2r}.
  std::vector<Index> sensor_counts;
  std::vector<double> noise_levels{0.0, 0.001, 0.003, 0.01, 0.03, 0.1};
  std::size_t trials = 10;
  bool random_baseline = true;
  // run
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";
};

/// Reads a JSON config; absent keys keep their defaults. Sections:
/// "dataset", "preprocess", "pod", "placement", "evaluate", plus top-level
/// "seed" and "out".
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text);
std::string dump_config(const PipelineConfig& config);
/// FNV-1a over the canonical dump, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

/// Dataset after loading or generating, split and (optionally) centering.
struct PreparedData {
  SnapshotMatrix full;
  Split split;
  SnapshotMatrix train;
  SnapshotMatrix test;
  MeanField train_mean;
  PodSpectrum spectrum;
  PodBasis basis;
};

PreparedData prepare(const PipelineConfig& config);

/// Writes `dataset.bin` (and `dataset.coords.csv` when coordinates exist)
/// under the output directory, creating it when missing.
std::filesystem::path cmd_generate(const PipelineConfig& config, std::ostream& log);

/// Writes `pod_spectrum.csv` and `pod_modes.bin`; returns the chosen rank.
Index cmd_pod(const PipelineConfig& config, std::ostream& log);

struct PlaceResult {
  SensorSet sensors;
  Index rank = 0;
  double volume = 0.0;
};
/// Writes `sensors.json` and prints the ranking and energy tables.
PlaceResult cmd_place(const PipelineConfig& config, std::ostream& log);

/// Writes `report.csv`, `coefficients.csv` and `manifest.json`.
ReconstructionReport cmd_evaluate(const PipelineConfig& config, std::ostream& log);

/// Maps the library's exception types onto process exit codes.
int exit_code_for(const std::exception& e);

}  // namespace sensorplace::cli
