#include "sensorplace/reconstruct.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sensorplace/errors.hpp"
#include "sensorplace/random.hpp"

namespace sensorplace {
namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string describe(const SensorSet& sensors) {
  std::string out = "[";
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(sensors.indices[i]);
  }
  return out + "]";
}

}  // namespace

MeasurementSeries measure(const Eigen::MatrixXd& fields, const SensorSet& sensors) {
  MeasurementSeries out;
  out.sensors = sensors;
  out.values.resize(static_cast<Index>(sensors.size()), fields.cols());
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const Index node = sensors.indices[i];
    if (node < 0 || node >= fields.rows())
      throw InvalidArgument("sensor node " + std::to_string(node) + " outside a field of " +
                            std::to_string(fields.rows()) + " nodes");
    out.values.row(static_cast<Index>(i)) = fields.row(node);
  }
  return out;
}

MeasurementSeries add_noise(const MeasurementSeries& series, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  MeasurementSeries out = series;
  out.noise_sigma = sigma;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Index j = 0; j < out.values.cols(); ++j)
    for (Index i = 0; i < out.values.rows(); ++i) out.values(i, j) += noise(rng);
  return out;
}

Reconstruction reconstruct(const PodBasis& basis, const SensorSet& sensors,
                           const MeasurementSeries& measurements,
                           const std::optional<MeanField>& mean) {
  const Index p = static_cast<Index>(sensors.size());
  const Index r = basis.rank();
  if (measurements.values.rows() != p)
    throw InvalidArgument("measurement rows do not match the sensor count");
  if (measurements.sensors.size() != 0 && measurements.sensors != sensors)
    throw InvalidArgument("measurements were taken with a different sensor set");
  if (p < r)
    throw UnderdeterminedError(std::to_string(p) + " sensors cannot determine " +
                               std::to_string(r) + " mode coefficients");
  if (mean && mean->values.size() != basis.nodes())
    throw InvalidArgument("mean length does not match the basis");

  const Eigen::MatrixXd theta = measure(basis.modes, sensors).values;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(r - 1);
  const double condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smax > 0.0) || condition > 1.0 / std::numeric_limits<double>::epsilon())
    throw IllConditionedError("sensor selection " + describe(sensors) +
                                  " gives a numerically singular measurement matrix (cond " +
                                  format_double(condition) + ")",
                              condition);

  Eigen::MatrixXd readings = measurements.values;
  if (mean) readings.colwise() -= measure(mean->values, sensors).values.col(0);

  Eigen::VectorXd inv = Eigen::VectorXd::Zero(r);
  const double cutoff = 1e-10 * smax;
  for (Index k = 0; k < r; ++k)
    if (s(k) > cutoff) inv(k) = 1.0 / s(k);

  Reconstruction out;
  out.coefficients = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * readings);
  out.field = basis.modes * out.coefficients;
  if (mean) out.field.colwise() += mean->values;
  out.condition = condition;
  return out;
}

double nmse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
            const MeanField& reference) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw InvalidArgument("estimate and truth shapes differ");
  if (reference.values.size() != truth.rows())
    throw InvalidArgument("reference length does not match the field length");
  const double denom = (truth.colwise() - reference.values).squaredNorm();
  if (!(denom > 0.0)) throw InvalidArgument("truth has zero variance about the reference");
  return (estimate - truth).squaredNorm() / denom;
}

double projection_nmse(const PodBasis& basis, const Eigen::MatrixXd& truth,
                       const MeanField& reference) {
  const Eigen::MatrixXd fluct = truth.colwise() - reference.values;
  Eigen::MatrixXd best = basis.modes * project(basis, fluct);
  best.colwise() += reference.values;
  return nmse(best, truth, reference);
}

const SweepRow* ReconstructionReport::find(const std::string& strategy, double noise_sigma) const {
  for (const auto& row : rows)
    if (row.strategy == strategy && row.noise_sigma == noise_sigma) return &row;
  return nullptr;
}

ReconstructionReport noise_sweep(const PodBasis& basis, const std::vector<Strategy>& strategies,
                                 const Eigen::MatrixXd& test, const std::vector<double>& levels,
                                 std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("a sweep needs at least one trial");
  if (test.rows() != basis.nodes()) throw InvalidArgument("test set does not match the basis");
  for (double level : levels)
    if (!(level >= 0.0)) throw InvalidArgument("noise levels must be non-negative");

  const MeanField reference = basis.mean.value_or(MeanField{Eigen::VectorXd::Zero(basis.nodes())});

  ReconstructionReport report;
  report.seed = seed;
  report.projection_nmse = projection_nmse(basis, test, reference);

  for (std::size_t j = 0; j < strategies.size(); ++j) {
    const auto& strategy = strategies[j];
    const auto clean = measure(test, strategy.sensors);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      SweepRow row;
      row.strategy = strategy.label;
      row.noise_sigma = levels[l];
      row.trials = trials;

      std::vector<double> scores;
      double cond_sum = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        try {
          const auto noisy = add_noise(clean, levels[l], derive_seed(seed, {j, l, t}));
          const auto estimate = reconstruct(basis, strategy.sensors, noisy, basis.mean);
          scores.push_back(nmse(estimate.field, test, reference));
          cond_sum += estimate.condition;
        } catch (const Error& e) {
          ++row.failed_trials;
          row.failure = e.what();
        }
      }

      if (scores.empty()) {
        row.infeasible = true;
        row.nmse_mean = row.nmse_std = row.cond_mean = std::numeric_limits<double>::quiet_NaN();
      } else {
        const auto count = static_cast<double>(scores.size());
        double sum = 0.0;
        for (double v : scores) sum += v;
        row.nmse_mean = sum / count;
        double ss = 0.0;
        bool constant = true;
        for (double v : scores) {
          ss += (v - row.nmse_mean) * (v - row.nmse_mean);
          constant = constant && v == scores.front();
        }
        row.nmse_std = (constant || scores.size() < 2) ? 0.0 : std::sqrt(ss / (count - 1.0));
        if (constant) row.nmse_mean = scores.front();
        row.cond_mean = cond_sum / count;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string format_report_csv(const ReconstructionReport& report) {
  std::ostringstream out;
  out << "strategy,noise_sigma,nmse_mean,nmse_std,trials,cond_mean\n";
  for (const auto& row : report.rows)
    out << row.strategy << ',' << format_double(row.noise_sigma) << ','
        << format_double(row.nmse_mean) << ',' << format_double(row.nmse_std) << ','
        << row.trials << ',' << format_double(row.cond_mean) << '\n';
  return out.str();
}

std::string format_coefficients_csv(const Eigen::MatrixXd& coefficients) {
  std::ostringstream out;
  out << "snapshot";
  for (Index k = 0; k < coefficients.rows(); ++k) out << ",a_" << (k + 1);
  out << '\n';
  for (Index j = 0; j < coefficients.cols(); ++j) {
    out << j;
    for (Index k = 0; k < coefficients.rows(); ++k) out << ',' << format_double(coefficients(k, j));
    out << '\n';
  }
  return out.str();
}

}  // namespace sensorplace
