#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sensorplace/placement.hpp"
#include "sensorplace/pod.hpp"
#include "sensorplace/snapshots.hpp"

namespace sensorplace {

/// Sensor readings, one row per sensor and one column per snapshot.
struct MeasurementSeries {
  Eigen::MatrixXd values;
  SensorSet sensors;
  double noise_sigma = 0.0;
};

struct Reconstruction {
  /// n x k estimated full fields, mean included when one was supplied.
  Eigen::MatrixXd field;
  /// r x k estimated mode coefficients.
  Eigen::MatrixXd coefficients;
  /// 2-norm condition number of the measured mode rows C * Psi.
  double condition = 0.0;
};

/// Gathers rows `sensors.indices` of `fields` (n x k) in sensor order.
MeasurementSeries measure(const Eigen::MatrixXd& fields, const SensorSet& sensors);

/// Adds i.i.d. N(0, sigma^2) to every reading. sigma = 0 is the identity.
MeasurementSeries add_noise(const MeasurementSeries& series, double sigma, std::uint64_t seed);

/// Gappy POD estimate from sparse readings.
///
/// When `mean` is given the readings are raw field values: the mean at the
/// sensors is removed before solving and the full mean is added back to the
/// estimate. The coefficient solve goes through an SVD of C * Psi with
/// singular values below 1e-10 * sigma_max discarded.
///
/// Throws UnderdeterminedError when there are fewer sensors than modes and
/// IllConditionedError when cond(C * Psi) exceeds 1 / machine epsilon.
Reconstruction reconstruct(const PodBasis& basis, const SensorSet& sensors,
                           const MeasurementSeries& measurements,
                           const std::optional<MeanField>& mean = std::nullopt);

/// ||estimate - truth||_F^2 / ||truth - reference||_F^2.
double nmse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
            const MeanField& reference);

/// NMSE of the best rank-r approximation of `truth` in the basis span, the
/// floor that no sensor selection can beat.
double projection_nmse(const PodBasis& basis, const Eigen::MatrixXd& truth,
                       const MeanField& reference);

struct Strategy {
  std::string label;
  SensorSet sensors;
};

struct SweepRow {
  std::string strategy;
  double noise_sigma = 0.0;
  double nmse_mean = 0.0;
  /// Sample standard deviation over trials; 0 for a single trial.
  double nmse_std = 0.0;
  std::size_t trials = 0;
  std::size_t failed_trials = 0;
  double cond_mean = 0.0;
  /// Every trial failed; `failure` holds the last error message.
  bool infeasible = false;
  std::string failure;
};

struct ReconstructionReport {
  std::vector<SweepRow> rows;
  /// NMSE of the direct rank-r projection of the test set.
  double projection_nmse = 0.0;
  std::uint64_t seed = 0;

  const SweepRow* find(const std::string& strategy, double noise_sigma) const;
};

/// Noise-robustness sweep. For each (strategy, level) the test set is
/// measured, polluted with `trials` independent noise draws and
/// reconstructed; NMSE is taken against the clean test set with the basis
/// mean (or zero) as reference. Trial t of level l for strategy j draws its
/// noise from derive_seed(seed, {j, l, t}).
ReconstructionReport noise_sweep(const PodBasis& basis, const std::vector<Strategy>& strategies,
                                 const Eigen::MatrixXd& test, const std::vector<double>& levels,
                                 std::size_t trials, std::uint64_t seed);

/// `strategy,noise_sigma,nmse_mean,nmse_std,trials,cond_mean`
std::string format_report_csv(const ReconstructionReport& report);

/// `snapshot,a_1,...,a_r`, one row per reconstructed snapshot.
std::string format_coefficients_csv(const Eigen::MatrixXd& coefficients);

}  // namespace sensorplace
