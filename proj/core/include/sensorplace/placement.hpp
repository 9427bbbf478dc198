#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sensorplace/pod.hpp"

namespace sensorplace {

/// x * P^T = q * r_mat, with P the permutation whose k-th row is e_{perm[k]}.
struct QrFactorization {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r_mat;
  std::vector<Index> perm;
};

/// Ordered sensor node indices; position is importance rank.
struct SensorSet {
  std::vector<Index> indices;

  std::size_t size() const noexcept { return indices.size(); }
  /// Explicit p x n selection operator whose row i is e_{indices[i]}.
  Eigen::MatrixXd selection_matrix(Index n) const;

  friend bool operator==(const SensorSet&, const SensorSet&) = default;
};

/// Region and spacing restrictions on sensor locations.
struct ConstraintSpec {
  std::vector<Index> forbidden;
  /// Minimum Euclidean spacing between any two sensors, in coordinate units.
  double min_distance = 0.0;

  /// Throws InvalidArgument when indices exceed `n`, the distance is
  /// negative, or a positive distance comes without coordinates.
  void validate(Index n, bool have_coords) const;
};

struct PlacementOptions {
  /// A residual column counts as zero at or below this fraction of the
  /// largest initial column norm.
  double rank_tolerance = 1e-12;
  /// Oversampling forms the dense n x n matrix Psi Psi^T only up to this n.
  Index oversample_node_budget = 10'000;
};

/// Reflects column k of `r` (rows k..m-1) onto -alpha e_1 in place, updating
/// rows k.. of columns k.. and, when given, columns k.. of `q` so that q * r
/// is unchanged. Returns false and leaves both untouched when the column is
/// already zero below row k-1.
bool householder_step(Eigen::MatrixXd& r, Index k, Eigen::MatrixXd* q = nullptr);

/// Businger-Golub QR with column pivoting over min(m, n) steps. Ties between
/// equal residual norms go to the lowest current column position.
QrFactorization qr_pivot(const Eigen::MatrixXd& x);

/// Greedy determinant-maximizing sensor selection by pivoted QR on the
/// transposed mode matrix, masking forbidden nodes and nodes closer than the
/// minimum distance to an already chosen sensor. For p above the basis rank
/// the pivoting runs on Psi Psi^T; once that has exhausted the basis rank the
/// remaining sensors are added one at a time, each maximizing
/// det(Theta^T Theta).
///
/// `coords` is n x dim, or empty when the nodes have no coordinates.
SensorSet place_sensors(const PodBasis& basis, Index p, const ConstraintSpec& constraints,
                        const Eigen::MatrixXd& coords, const PlacementOptions& options = {});

/// |det(Theta^T Theta)| for Theta = the selected rows of the mode matrix.
double selection_volume(const PodBasis& basis, const SensorSet& sensors);

/// Seeded uniform draw without replacement from the allowable nodes,
/// rejecting candidates that violate the minimum distance. Gives up after
/// `max_rounds` full passes.
SensorSet random_placement(Index n, Index p, const ConstraintSpec& constraints,
                           const Eigen::MatrixXd& coords, std::uint64_t seed,
                           int max_rounds = 200);

}  // namespace sensorplace
