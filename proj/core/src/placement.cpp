#include "sensorplace/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sensorplace/errors.hpp"
#include "sensorplace/random.hpp"

namespace sensorplace {
namespace {

// Blocks every node closer than the minimum distance to `chosen`.
void block_neighbourhood(std::vector<char>& blocked, const Eigen::MatrixXd& coords, Index chosen,
                         double min_distance) {
  if (min_distance <= 0.0) return;
  const double limit = min_distance * min_distance;
  for (Index j = 0; j < coords.rows(); ++j)
    if ((coords.row(j) - coords.row(chosen)).squaredNorm() < limit)
      blocked[static_cast<std::size_t>(j)] = 1;
}

std::vector<char> forbidden_mask(Index n, const ConstraintSpec& constraints) {
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  for (auto i : constraints.forbidden) blocked[static_cast<std::size_t>(i)] = 1;
  return blocked;
}

std::string placed_message(std::size_t placed, Index wanted, const char* reason) {
  return "placed " + std::to_string(placed) + " of " + std::to_string(wanted) + " sensors: " +
         reason;
}

// Adds sensors one at a time, each maximizing det(Theta^T Theta), i.e. the
// leverage psi_j^T (Theta^T Theta)^{-1} psi_j of the candidate row.
void extend_by_determinant(const Eigen::MatrixXd& modes, Index p, std::vector<Index>& chosen,
                           std::vector<char>& blocked, const Eigen::MatrixXd& coords,
                           double min_distance) {
  const Index n = modes.rows();
  const Index r = modes.cols();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(r, r);
  for (auto j : chosen) info.noalias() += modes.row(j).transpose() * modes.row(j);

  while (static_cast<Index>(chosen.size()) < p) {
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success)
      throw InfeasibleError(placed_message(chosen.size(), p,
                                           "selected rows do not span the basis, cannot oversample"),
                            chosen.size());
    const Eigen::MatrixXd whitened = llt.matrixL().solve(modes.transpose());
    const Eigen::VectorXd leverage = whitened.colwise().squaredNorm().transpose();

    Index best = -1;
    for (Index j = 0; j < n; ++j) {
      if (blocked[static_cast<std::size_t>(j)]) continue;
      if (best < 0 || leverage(j) > leverage(best)) best = j;
    }
    if (best < 0)
      throw InfeasibleError(placed_message(chosen.size(), p, "constraints exclude every remaining node"),
                            chosen.size());
    chosen.push_back(best);
    blocked[static_cast<std::size_t>(best)] = 1;
    block_neighbourhood(blocked, coords, best, min_distance);
    info.noalias() += modes.row(best).transpose() * modes.row(best);
  }
}

}  // namespace

Eigen::MatrixXd SensorSet::selection_matrix(Index n) const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Index>(indices.size()), n);
  for (std::size_t i = 0; i < indices.size(); ++i) c(static_cast<Index>(i), indices[i]) = 1.0;
  return c;
}

void ConstraintSpec::validate(Index n, bool have_coords) const {
  for (auto i : forbidden)
    if (i < 0 || i >= n)
      throw InvalidArgument("forbidden node " + std::to_string(i) + " outside [0, " +
                            std::to_string(n) + ")");
  if (!(min_distance >= 0.0)) throw InvalidArgument("min_distance must be non-negative");
  if (min_distance > 0.0 && !have_coords)
    throw InvalidArgument("a positive min_distance requires node coordinates");
}

bool householder_step(Eigen::MatrixXd& r, Index k, Eigen::MatrixXd* q) {
  const Index m = r.rows();
  const Index n = r.cols();
  if (k < 0 || k >= m || k >= n) throw InvalidArgument("householder step index out of range");

  Eigen::VectorXd u = r.col(k).tail(m - k);
  const double norm = u.norm();
  if (norm == 0.0) return false;
  const double alpha = (u(0) >= 0.0 ? 1.0 : -1.0) * norm;
  u(0) += alpha;
  u /= u.norm();

  auto block = r.bottomRightCorner(m - k, n - k);
  const Eigen::RowVectorXd projection = u.transpose() * block;
  block.noalias() -= 2.0 * u * projection;
  r(k, k) = -alpha;
  r.col(k).tail(m - k - 1).setZero();

  if (q != nullptr) {
    auto qcols = q->rightCols(m - k);
    const Eigen::VectorXd image = qcols * u;
    qcols.noalias() -= 2.0 * image * u.transpose();
  }
  return true;
}

QrFactorization qr_pivot(const Eigen::MatrixXd& x) {
  if (x.rows() < 1 || x.cols() < 1) throw InvalidArgument("qr_pivot needs a non-empty matrix");
  if (!x.allFinite()) throw InvalidArgument("qr_pivot input has non-finite entries");

  const Index m = x.rows();
  const Index n = x.cols();
  QrFactorization out{Eigen::MatrixXd::Identity(m, m), x, std::vector<Index>(static_cast<std::size_t>(n))};
  std::iota(out.perm.begin(), out.perm.end(), Index{0});

  for (Index k = 0; k < std::min(m, n); ++k) {
    Index l = 0;
    out.r_mat.bottomRightCorner(m - k, n - k).colwise().norm().maxCoeff(&l);
    if (l != 0) out.r_mat.col(k).swap(out.r_mat.col(k + l));
    std::swap(out.perm[static_cast<std::size_t>(k)], out.perm[static_cast<std::size_t>(k + l)]);
    householder_step(out.r_mat, k, &out.q);
  }
  return out;
}

SensorSet place_sensors(const PodBasis& basis, Index p, const ConstraintSpec& constraints,
                        const Eigen::MatrixXd& coords, const PlacementOptions& options) {
  const Index n = basis.nodes();
  const Index r = basis.rank();
  if (n < 1 || r < 1) throw InvalidArgument("basis is empty");
  if (p < 1) throw InvalidArgument("sensor count must be at least 1");
  if (!basis.modes.allFinite()) throw InvalidArgument("basis has non-finite entries");
  const bool have_coords = coords.size() > 0;
  if (have_coords && coords.rows() != n)
    throw InvalidArgument("coordinate count does not match basis length");
  constraints.validate(n, have_coords);

  auto blocked = forbidden_mask(n, constraints);
  const auto allowable = std::count(blocked.begin(), blocked.end(), char{0});
  if (p > allowable)
    throw InfeasibleError(placed_message(0, p, "more sensors than allowable nodes"), 0);

  const bool oversample = p > r;
  if (oversample && n > options.oversample_node_budget)
    throw InvalidArgument("oversampling forms a dense " + std::to_string(n) + " x " +
                          std::to_string(n) + " matrix, above the node budget of " +
                          std::to_string(options.oversample_node_budget) +
                          "; subsample candidate nodes first");

  Eigen::MatrixXd work = oversample ? Eigen::MatrixXd(basis.modes * basis.modes.transpose())
                                    : Eigen::MatrixXd(basis.modes.transpose());
  const Index rows = work.rows();
  const double zero_norm = options.rank_tolerance * work.colwise().norm().maxCoeff();

  // position -> node index; columns of `work` move with it
  std::vector<Index> gamma(static_cast<std::size_t>(n));
  std::iota(gamma.begin(), gamma.end(), Index{0});
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(p));

  for (Index k = 0; k < std::min(p, rows); ++k) {
    Eigen::RowVectorXd norms = work.bottomRightCorner(rows - k, n - k).colwise().norm();
    for (Index j = 0; j < norms.size(); ++j)
      if (blocked[static_cast<std::size_t>(gamma[static_cast<std::size_t>(k + j)])]) norms(j) = 0.0;
    Index l = 0;
    const double best = norms.maxCoeff(&l);
    if (best <= zero_norm) {
      if (oversample && static_cast<Index>(chosen.size()) >= r) break;
      throw InfeasibleError(
          placed_message(chosen.size(), p,
                         "no allowable node has a nonzero residual (constraints or rank collapse)"),
          chosen.size());
    }
    if (l != 0) work.col(k).swap(work.col(k + l));
    std::swap(gamma[static_cast<std::size_t>(k)], gamma[static_cast<std::size_t>(k + l)]);
    householder_step(work, k);

    const Index node = gamma[static_cast<std::size_t>(k)];
    chosen.push_back(node);
    blocked[static_cast<std::size_t>(node)] = 1;
    block_neighbourhood(blocked, coords, node, constraints.min_distance);
  }

  if (static_cast<Index>(chosen.size()) < p)
    extend_by_determinant(basis.modes, p, chosen, blocked, coords, constraints.min_distance);

  return SensorSet{std::move(chosen)};
}

double selection_volume(const PodBasis& basis, const SensorSet& sensors) {
  const Index r = basis.rank();
  Eigen::MatrixXd theta(static_cast<Index>(sensors.size()), r);
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const Index node = sensors.indices[i];
    if (node < 0 || node >= basis.nodes())
      throw InvalidArgument("sensor index " + std::to_string(node) + " out of range");
    theta.row(static_cast<Index>(i)) = basis.modes.row(node);
  }
  const Eigen::MatrixXd gram = theta.transpose() * theta;
  return std::abs(gram.partialPivLu().determinant());
}

SensorSet random_placement(Index n, Index p, const ConstraintSpec& constraints,
                           const Eigen::MatrixXd& coords, std::uint64_t seed, int max_rounds) {
  if (p < 1) throw InvalidArgument("sensor count must be at least 1");
  const bool have_coords = coords.size() > 0;
  if (have_coords && coords.rows() != n)
    throw InvalidArgument("coordinate count does not match node count");
  constraints.validate(n, have_coords);

  const auto blocked = forbidden_mask(n, constraints);
  std::vector<Index> allowable;
  for (Index j = 0; j < n; ++j)
    if (!blocked[static_cast<std::size_t>(j)]) allowable.push_back(j);
  if (static_cast<Index>(allowable.size()) < p)
    throw InfeasibleError(placed_message(0, p, "more sensors than allowable nodes"), 0);

  const double limit = constraints.min_distance * constraints.min_distance;
  std::size_t best_count = 0;
  for (int round = 0; round < max_rounds; ++round) {
    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(round)}));
    auto order = allowable;
    shuffle(order, rng);
    std::vector<Index> chosen;
    for (auto j : order) {
      const bool too_close =
          limit > 0.0 && std::any_of(chosen.begin(), chosen.end(), [&](Index s) {
            return (coords.row(j) - coords.row(s)).squaredNorm() < limit;
          });
      if (too_close) continue;
      chosen.push_back(j);
      if (static_cast<Index>(chosen.size()) == p) return SensorSet{std::move(chosen)};
    }
    best_count = std::max(best_count, chosen.size());
  }
  throw InfeasibleError(placed_message(best_count, p, "random draws could not satisfy the spacing"),
                        best_count);
}

}  // namespace sensorplace
