#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sensorplace {

using Index = Eigen::Index;

/// Full-state data: one column per snapshot, one row per spatial node.
///
/// Snapshots are stored case-major: the column of (case c, time-step t) is
/// `c * steps_per_case + t`.
struct SnapshotMatrix {
  Eigen::MatrixXd values;
  std::size_t n_cases = 0;
  std::size_t steps_per_case = 1;
  /// n x dim node coordinates (dim in 1..3); empty when absent.
  Eigen::MatrixXd coords;
  /// Stable node labels; empty when absent.
  std::vector<std::string> node_ids;

  Index nodes() const noexcept { return values.rows(); }
  Index snapshots() const noexcept { return values.cols(); }
  bool has_coords() const noexcept { return coords.size() > 0; }
  Index column(std::size_t case_index, std::size_t step) const noexcept {
    return static_cast<Index>(case_index * steps_per_case + step);
  }

  /// Throws InvalidArgument when any invariant is broken.
  void validate() const;

  /// Column subset; the cases listed must be whole cases.
  SnapshotMatrix select_cases(const std::vector<std::size_t>& cases) const;
};

/// Snapshot-averaged field.
struct MeanField {
  Eigen::VectorXd values;
};

/// Case-level partition of a snapshot matrix into training and test columns.
struct Split {
  std::vector<std::size_t> train_cases;
  std::vector<std::size_t> test_cases;
  std::vector<Index> train_indices;
  std::vector<Index> test_indices;
  std::uint64_t seed = 0;

  friend bool operator==(const Split&, const Split&) = default;
};

/// Case-wise spread of one sensor's readings at every time-step.
struct VarianceSeries {
  Eigen::VectorXd per_step_variance;
  Eigen::VectorXd per_step_mean;
  std::size_t n_cases = 0;
};

/// Inclusive range `start:step:stop`, MATLAB style. The end point is kept
/// when it lies within rounding of the last step.
std::vector<double> inclusive_range(double start, double step, double stop);

/// One unit-area Gaussian profile per (mean, sigma) pair, means outer.
SnapshotMatrix generate_gaussian_dataset(double grid_min, double grid_max,
                                         double grid_step,
                                         const std::vector<double>& means,
                                         const std::vector<double>& sigmas);

struct Centered {
  SnapshotMatrix fluctuations;
  MeanField mean;
};

/// Subtracts the snapshot average from every column.
Centered center(const SnapshotMatrix& m);

/// Adds `mean` back to every column.
Eigen::MatrixXd uncenter(const Eigen::MatrixXd& fluctuations,
                         const MeanField& mean);

/// Random case-level split. The train case count is
/// round(train_fraction * n_cases) clamped to [1, n_cases - 1].
Split split(const SnapshotMatrix& m, double train_fraction, std::uint64_t seed);

/// Population variance (1/N) and mean of a sensor across cases per step.
VarianceSeries case_variance(const SnapshotMatrix& m, Index sensor_index);

}  // namespace sensorplace
