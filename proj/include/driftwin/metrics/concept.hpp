#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string_view>

#include "driftwin/core/dataset.hpp"
#include "driftwin/metrics/pca.hpp"

namespace driftwin::metrics {

// Jensen-Shannon divergence between Bernoulli(p) and Bernoulli(q) in bits,
// so the range is [0, 1]. 0 * log 0 is taken as 0.
double js_bernoulli(double p, double q);

// Base-2 JS divergence between two discrete distributions (normalized inside).
double js_discrete(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Mean over rows x_i of JS(Bernoulli(sigmoid(b_train . [1, x_i])),
// Bernoulli(sigmoid(b_test . [1, x_i]))). Coefficients are intercept first.
double concept_shift_oracle(const Eigen::VectorXd& beta_train, const Eigen::VectorXd& beta_test,
                            const Eigen::MatrixXd& test_x);

// For every query row, the mean label of its k nearest reference rows under
// Euclidean distance. Distance ties go to the lower reference index.
Eigen::VectorXd knn_conditional_estimate(const Eigen::MatrixXd& ref_x, const Eigen::VectorXd& ref_y,
                                         const Eigen::MatrixXd& query_x, int k);

enum class KnnJsMode {
  Pointwise,  // mean Bernoulli JS of the two estimates at each test row
  Histogram,  // JS between 20-bin histograms of the two estimate sets
};

std::string_view to_string(KnnJsMode m);
KnnJsMode parse_knn_js_mode(std::string_view text);

// max(25, floor(sqrt(n_train))), capped by both reference sizes.
int default_knn_k(Index n_train, Index n_test);

// Standardized PCA scores of the continuous block (train-fit basis) followed
// by the unscaled binary block. `basis` is empty when there are no usable
// continuous features.
Eigen::MatrixXd knn_embedding(const PeriodDataset& data, const std::optional<PcaBasis>& basis);

// kNN concept shift: estimates from a train-referenced and a test-referenced
// kNN, both evaluated at the test rows, compared with JS.
double concept_shift_knn(const PeriodDataset& train, const PeriodDataset& test, int k,
                         const std::optional<PcaBasis>& basis, KnnJsMode mode = KnnJsMode::Pointwise);

}  // namespace driftwin::metrics
