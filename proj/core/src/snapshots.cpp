#include "sensorplace/snapshots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sensorplace/errors.hpp"
#include "sensorplace/random.hpp"

namespace sensorplace {

void SnapshotMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw InvalidArgument("snapshot matrix must have at least one node and one snapshot");
  if (n_cases < 1 || steps_per_case < 1 ||
      n_cases * steps_per_case != static_cast<std::size_t>(values.cols()))
    throw InvalidArgument("n_cases * steps_per_case (" + std::to_string(n_cases) + " * " +
                          std::to_string(steps_per_case) + ") does not match " +
                          std::to_string(values.cols()) + " snapshots");
  if (has_coords()) {
    if (coords.rows() != values.rows())
      throw InvalidArgument("coordinate count does not match node count");
    if (coords.cols() < 1 || coords.cols() > 3)
      throw InvalidArgument("coordinates must have dimension 1 to 3");
  }
  if (!node_ids.empty() && node_ids.size() != static_cast<std::size_t>(values.rows()))
    throw InvalidArgument("node id count does not match node count");
  if (!values.allFinite()) throw InvalidArgument("snapshot matrix has non-finite entries");
}

SnapshotMatrix SnapshotMatrix::select_cases(const std::vector<std::size_t>& cases) const {
  SnapshotMatrix out;
  out.values.resize(values.rows(), static_cast<Index>(cases.size() * steps_per_case));
  Index col = 0;
  for (auto c : cases) {
    if (c >= n_cases) throw InvalidArgument("case index out of range");
    out.values.middleCols(col, static_cast<Index>(steps_per_case)) =
        values.middleCols(column(c, 0), static_cast<Index>(steps_per_case));
    col += static_cast<Index>(steps_per_case);
  }
  out.n_cases = cases.size();
  out.steps_per_case = steps_per_case;
  out.coords = coords;
  out.node_ids = node_ids;
  return out;
}

std::vector<double> inclusive_range(double start, double step, double stop) {
  if (!(step > 0.0)) throw InvalidArgument("range step must be positive");
  if (stop < start) throw InvalidArgument("range stop precedes start");
  // Count is floored after nudging by a relative epsilon so 0.5:0.2:6.5 keeps 6.5.
  const double span = (stop - start) / step;
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9 * std::max(1.0, span))) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
  return out;
}

SnapshotMatrix generate_gaussian_dataset(double grid_min, double grid_max, double grid_step,
                                         const std::vector<double>& means,
                                         const std::vector<double>& sigmas) {
  if (!(grid_step > 0.0)) throw InvalidArgument("grid_step must be positive");
  if (!(grid_max > grid_min)) throw InvalidArgument("grid_max must exceed grid_min");
  if (means.empty() || sigmas.empty())
    throw InvalidArgument("means and sigmas must be non-empty");
  for (double s : sigmas)
    if (!(s > 0.0)) throw InvalidArgument("every sigma must be positive");

  const auto grid = inclusive_range(grid_min, grid_step, grid_max);
  const auto n = static_cast<Index>(grid.size());

  SnapshotMatrix out;
  out.values.resize(n, static_cast<Index>(means.size() * sigmas.size()));
  out.coords.resize(n, 1);
  for (Index i = 0; i < n; ++i) out.coords(i, 0) = grid[static_cast<std::size_t>(i)];

  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  Index col = 0;
  for (double mu : means) {
    for (double sigma : sigmas) {
      const double norm = inv_sqrt_2pi / sigma;
      for (Index i = 0; i < n; ++i) {
        const double z = (out.coords(i, 0) - mu) / sigma;
        out.values(i, col) = norm * std::exp(-0.5 * z * z);
      }
      ++col;
    }
  }
  out.n_cases = static_cast<std::size_t>(col);
  out.steps_per_case = 1;
  return out;
}

Centered center(const SnapshotMatrix& m) {
  m.validate();
  Centered out{m, MeanField{m.values.rowwise().mean()}};
  out.fluctuations.values.colwise() -= out.mean.values;
  return out;
}

Eigen::MatrixXd uncenter(const Eigen::MatrixXd& fluctuations, const MeanField& mean) {
  if (fluctuations.rows() != mean.values.size())
    throw InvalidArgument("mean length does not match field length");
  Eigen::MatrixXd out = fluctuations;
  out.colwise() += mean.values;
  return out;
}

Split split(const SnapshotMatrix& m, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  m.validate();
  if (m.n_cases < 2) throw InvalidArgument("splitting needs at least two cases");

  const auto requested = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(m.n_cases)));
  const auto n_train = std::clamp<std::size_t>(requested, 1, m.n_cases - 1);

  std::vector<std::size_t> cases(m.n_cases);
  std::iota(cases.begin(), cases.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  shuffle(cases, rng);

  Split out;
  out.seed = seed;
  out.train_cases.assign(cases.begin(), cases.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_cases.assign(cases.begin() + static_cast<std::ptrdiff_t>(n_train), cases.end());
  std::sort(out.train_cases.begin(), out.train_cases.end());
  std::sort(out.test_cases.begin(), out.test_cases.end());

  auto expand = [&](const std::vector<std::size_t>& cs, std::vector<Index>& cols) {
    for (auto c : cs)
      for (std::size_t t = 0; t < m.steps_per_case; ++t) cols.push_back(m.column(c, t));
  };
  expand(out.train_cases, out.train_indices);
  expand(out.test_cases, out.test_indices);
  return out;
}

VarianceSeries case_variance(const SnapshotMatrix& m, Index sensor_index) {
  m.validate();
  if (sensor_index < 0 || sensor_index >= m.nodes())
    throw InvalidArgument("sensor index " + std::to_string(sensor_index) + " out of range");

  const auto steps = static_cast<Index>(m.steps_per_case);
  VarianceSeries out;
  out.n_cases = m.n_cases;
  out.per_step_mean = Eigen::VectorXd::Zero(steps);
  out.per_step_variance = Eigen::VectorXd::Zero(steps);

  // Welford update over cases, one accumulator per step.
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(steps);
  for (std::size_t c = 0; c < m.n_cases; ++c) {
    const double count = static_cast<double>(c + 1);
    for (Index t = 0; t < steps; ++t) {
      const double x = m.values(sensor_index, m.column(c, static_cast<std::size_t>(t)));
      const double delta = x - out.per_step_mean(t);
      out.per_step_mean(t) += delta / count;
      m2(t) += delta * (x - out.per_step_mean(t));
    }
  }
  out.per_step_variance = (m2 / static_cast<double>(m.n_cases)).cwiseMax(0.0);
  return out;
}

}  // namespace sensorplace
