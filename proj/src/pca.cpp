#include "driftwin/metrics/pca.hpp"

#include <algorithm>
#include <cmath>

#include "driftwin/core/errors.hpp"

namespace driftwin::metrics {

Eigen::MatrixXd PcaBasis::project(const Eigen::MatrixXd& cont) const {
  if (cont.cols() != input_dim()) {
    throw SchemaError("pca: input has " + std::to_string(cont.cols()) + " columns, basis expects " +
                      std::to_string(input_dim()));
  }
  Eigen::MatrixXd z = cont(Eigen::all, kept);
  z.rowwise() -= mean.transpose();
  z.array().rowwise() /= scale.transpose().array();
  return z * components.transpose();
}

PcaBasis fit_pca(const Eigen::MatrixXd& train_cont, double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw MetricError("pca: variance target must lie in (0, 1]");
  }
  const Index n = train_cont.rows();
  if (n < 2) throw MetricError("pca: at least two rows required");

  PcaBasis basis;
  const Eigen::VectorXd mean = train_cont.colwise().mean();
  for (Index j = 0; j < train_cont.cols(); ++j) {
    const double var = (train_cont.col(j).array() - mean[j]).square().sum() / static_cast<double>(n - 1);
    // Relative floor treats columns that are constant up to rounding as constant.
    const double floor = 1e-24 * std::max(1.0, mean[j] * mean[j]);
    (var > floor ? basis.kept : basis.dropped).push_back(j);
  }
  if (basis.kept.empty()) throw MetricError("pca: every continuous feature has zero variance");

  const auto k = static_cast<Index>(basis.kept.size());
  basis.mean = mean(basis.kept);
  Eigen::MatrixXd z = train_cont(Eigen::all, basis.kept);
  z.rowwise() -= basis.mean.transpose();
  basis.scale = (z.colwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt().transpose();
  z.array().rowwise() /= basis.scale.transpose().array();

  const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigen returns ascending eigenvalues; reverse to descending.
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  const double total = values.sum();

  Index keep = 1;
  double cumulative = values[0] / total;
  while (keep < k && cumulative < variance_target && values[keep] > 0.0) {
    cumulative += values[keep] / total;
    ++keep;
  }
  // Deterministic sign: the largest-magnitude loading of each component is positive.
  basis.components = vectors.leftCols(keep).transpose();
  for (Index r = 0; r < keep; ++r) {
    Index arg = 0;
    basis.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (basis.components(r, arg) < 0.0) basis.components.row(r) *= -1.0;
  }
  basis.explained_variance_ratio = values.head(keep) / total;
  return basis;
}

}  // namespace driftwin::metrics
