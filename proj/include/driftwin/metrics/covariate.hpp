#pragma once

#include <Eigen/Dense>

#include <span>

#include "driftwin/metrics/pca.hpp"

namespace driftwin::metrics {

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a(z) - F_b(z)|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Mean KS statistic over the principal components of `basis`; both blocks
// are standardized and projected with the training-fit basis.
double covariate_shift_continuous(const Eigen::MatrixXd& train_cont, const Eigen::MatrixXd& test_cont,
                                  const PcaBasis& basis);

struct BinaryFeatureShift {
  double delta_p = 0.0;
  double cramers_v = 0.0;
};

// |p_train - p_test| and Cramer's V (no continuity correction) of the 2x2
// sample-by-value table for one binary column. A column constant across both
// samples has V = 0.
BinaryFeatureShift binary_feature_shift(std::span<const double> train, std::span<const double> test);

// (mean delta_p + mean V) / 2 over binary columns.
double covariate_shift_binary(const Eigen::MatrixXd& train_bin, const Eigen::MatrixXd& test_bin);

inline double covariate_shift_unified(double cov_cont, double cov_bin) { return (cov_cont + cov_bin) / 2.0; }

}  // namespace driftwin::metrics
