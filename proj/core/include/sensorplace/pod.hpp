#pragma once

#include <optional>
#include <variant>

#include <Eigen/Dense>

#include "sensorplace/snapshots.hpp"

namespace sensorplace {

/// Thin SVD of a snapshot matrix: values = left * diag(singular_values) * right^T.
struct PodSpectrum {
  Eigen::MatrixXd left_vectors;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right_vectors;
};

enum class BasisScaling { unit, sv_scaled };

struct PodBasis {
  /// n x r. Unit-norm columns, or columns scaled by their singular value.
  Eigen::MatrixXd modes;
  Eigen::VectorXd singular_values;
  BasisScaling scaling = BasisScaling::sv_scaled;
  std::optional<MeanField> mean;

  Index rank() const noexcept { return modes.cols(); }
  Index nodes() const noexcept { return modes.rows(); }
  /// The same basis with orthonormal columns.
  Eigen::MatrixXd unit_modes() const;
};

struct RankCriterion {
  Index rank;
};
struct EnergyCriterion {
  double fraction;
};
using TruncationCriterion = std::variant<RankCriterion, EnergyCriterion>;

enum class PodMethod { automatic, direct_svd, snapshots };

struct PodOptions {
  std::optional<Index> max_rank;
  PodMethod method = PodMethod::automatic;
  /// `automatic` switches to the method of snapshots when n > ratio * m.
  double snapshot_ratio = 4.0;
};

/// Singular values come out non-increasing. Each left vector is signed so
/// that its largest-magnitude entry is positive.
PodSpectrum compute_pod(const Eigen::MatrixXd& values, const PodOptions& options = {});

/// Entry r-1 is the energy fraction captured by the leading r modes.
Eigen::VectorXd cumulative_energy(const PodSpectrum& spectrum);

PodBasis truncate(const PodSpectrum& spectrum, const TruncationCriterion& criterion,
                  BasisScaling scaling, std::optional<MeanField> mean = std::nullopt);

/// Least-squares mode coefficients of `field` (no mean handling).
Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& field);
Eigen::MatrixXd project(const PodBasis& basis, const Eigen::MatrixXd& fields);

}  // namespace sensorplace
