#include "sensorplace/pod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sensorplace/errors.hpp"

namespace sensorplace {
namespace {

void fix_signs(PodSpectrum& s) {
  for (Index k = 0; k < s.left_vectors.cols(); ++k) {
    Index arg = 0;
    s.left_vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (s.left_vectors(arg, k) < 0.0) {
      s.left_vectors.col(k) *= -1.0;
      s.right_vectors.col(k) *= -1.0;
    }
  }
}

PodSpectrum direct_svd(const Eigen::MatrixXd& a, Index k) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(k), svd.singularValues().head(k), svd.matrixV().leftCols(k)};
}

// Method of snapshots: the Gram eigenvectors give the right singular
// subspace. A small SVD of A*V then recovers the left vectors and singular
// values to full precision, which the plain A*V*inv(S) formula loses for the
// small (and, for centered data, exactly zero) trailing values.
PodSpectrum snapshot_method(const Eigen::MatrixXd& a, Index k) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw Error("Gram eigendecomposition failed");

  const Index m = a.cols();
  Eigen::MatrixXd v(m, k);
  for (Index j = 0; j < k; ++j) v.col(j) = eig.eigenvectors().col(m - 1 - j);

  const Eigen::MatrixXd av = a * v;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(av);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> small(r, Eigen::ComputeFullU | Eigen::ComputeFullV);

  PodSpectrum out;
  out.left_vectors = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), k);
  out.left_vectors = out.left_vectors * small.matrixU();
  out.singular_values = small.singularValues();
  out.right_vectors = v * small.matrixV();
  return out;
}

}  // namespace

Eigen::MatrixXd PodBasis::unit_modes() const {
  if (scaling == BasisScaling::unit) return modes;
  Eigen::MatrixXd out = modes;
  for (Index k = 0; k < out.cols(); ++k)
    if (singular_values(k) > 0.0) out.col(k) /= singular_values(k);
  return out;
}

PodSpectrum compute_pod(const Eigen::MatrixXd& values, const PodOptions& options) {
  if (values.size() == 0) throw InvalidArgument("cannot decompose an empty matrix");
  if (!values.allFinite()) throw InvalidArgument("snapshot matrix has non-finite entries");

  const Index full = std::min(values.rows(), values.cols());
  const Index k = options.max_rank.value_or(full);
  if (k < 1 || k > full)
    throw InvalidArgument("max_rank must lie in [1, " + std::to_string(full) + "]");

  bool use_snapshots = options.method == PodMethod::snapshots;
  if (options.method == PodMethod::automatic)
    use_snapshots = static_cast<double>(values.rows()) >
                    options.snapshot_ratio * static_cast<double>(values.cols());

  PodSpectrum out = use_snapshots && values.rows() >= values.cols() ? snapshot_method(values, k)
                                                                    : direct_svd(values, k);
  fix_signs(out);
  return out;
}

Eigen::VectorXd cumulative_energy(const PodSpectrum& spectrum) {
  const auto& s = spectrum.singular_values;
  Eigen::VectorXd prefix(s.size());
  double running = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    running += s(i) * s(i);
    prefix(i) = running;
  }
  if (!(running > 0.0)) throw InvalidArgument("spectrum is identically zero");
  // Dividing by the final prefix pins the last entry to exactly 1.
  return prefix / running;
}

PodBasis truncate(const PodSpectrum& spectrum, const TruncationCriterion& criterion,
                  BasisScaling scaling, std::optional<MeanField> mean) {
  const Index available = spectrum.singular_values.size();
  Index r = 0;
  if (const auto* byrank = std::get_if<RankCriterion>(&criterion)) {
    if (byrank->rank < 1 || byrank->rank > available)
      throw InvalidArgument("rank " + std::to_string(byrank->rank) + " outside [1, " +
                            std::to_string(available) + "]");
    r = byrank->rank;
  } else {
    const double fraction = std::get<EnergyCriterion>(criterion).fraction;
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw InvalidArgument("energy fraction must lie in (0, 1]");
    const auto energy = cumulative_energy(spectrum);
    r = available;
    for (Index i = 0; i < available; ++i) {
      if (energy(i) >= fraction) {
        r = i + 1;
        break;
      }
    }
  }

  PodBasis out;
  out.singular_values = spectrum.singular_values.head(r);
  out.modes = spectrum.left_vectors.leftCols(r);
  out.scaling = scaling;
  out.mean = std::move(mean);
  if (scaling == BasisScaling::sv_scaled) out.modes *= out.singular_values.asDiagonal();
  return out;
}

Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& field) {
  return project(basis, Eigen::MatrixXd(field)).col(0);
}

Eigen::MatrixXd project(const PodBasis& basis, const Eigen::MatrixXd& fields) {
  if (fields.rows() != basis.nodes())
    throw InvalidArgument("field length " + std::to_string(fields.rows()) +
                          " does not match basis length " + std::to_string(basis.nodes()));
  Eigen::MatrixXd coeffs = basis.unit_modes().transpose() * fields;
  if (basis.scaling == BasisScaling::sv_scaled) {
    // Pseudo-inverse of diag(sigma): zero singular values contribute nothing.
    const double cutoff = 1e-10 * basis.singular_values.maxCoeff();
    for (Index k = 0; k < coeffs.rows(); ++k)
      coeffs.row(k) = basis.singular_values(k) > cutoff
                          ? Eigen::RowVectorXd(coeffs.row(k) / basis.singular_values(k))
                          : Eigen::RowVectorXd::Zero(coeffs.cols());
  }
  return coeffs;
}

}  // namespace sensorplace
