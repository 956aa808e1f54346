#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "driftwin/core/dataset.hpp"

namespace driftwin::learn {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct LogisticOptions {
  double l2 = 1e-6;  // ridge on non-intercept weights
  double tol = 1e-8;  // on the gradient of the mean penalized loss
  int max_iter = 100;
};

struct LogisticModel {
  Eigen::VectorXd weights;  // intercept first
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

// Mean negative log-likelihood plus (l2 / 2) * ||w[1:]||^2. `x` has no
// intercept column.
double logistic_loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2);
Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double l2);

// Newton / IRLS with step halving. Throws DegenerateFitError for fewer than
// two rows or single-class labels. Non-convergence is reported via the flag.
LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LogisticOptions& opts = {});
LogisticModel fit_logistic(const PeriodDataset& train, const LogisticOptions& opts = {});

Eigen::VectorXd predict_proba(const LogisticModel& model, const Eigen::MatrixXd& x);

}  // namespace driftwin::learn
