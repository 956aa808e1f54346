#pragma once

#include <Eigen/Dense>

#include <vector>

#include "driftwin/core/dataset.hpp"

namespace driftwin::metrics {

// Standardize-then-PCA basis fit on a training block. Zero-variance columns
// are excluded (listed in `dropped`) and never divided by.
struct PcaBasis {
  std::vector<Index> kept;     // input columns that entered the PCA
  std::vector<Index> dropped;  // zero-variance input columns
  Eigen::VectorXd mean;        // over kept columns
  Eigen::VectorXd scale;       // sample standard deviations of kept columns
  Eigen::MatrixXd components;  // d_pca x kept.size(), orthonormal rows
  Eigen::VectorXd explained_variance_ratio;

  Index input_dim() const { return static_cast<Index>(kept.size() + dropped.size()); }
  Index dims() const { return components.rows(); }
  // rows x dims() scores of `cont` (all original columns) in this basis.
  Eigen::MatrixXd project(const Eigen::MatrixXd& cont) const;
};

// Keeps the smallest number of leading components whose cumulative explained
// variance reaches `variance_target` (at least one). Throws MetricError with
// fewer than two rows or when every column has zero variance.
PcaBasis fit_pca(const Eigen::MatrixXd& train_cont, double variance_target = 0.95);

}  // namespace driftwin::metrics
