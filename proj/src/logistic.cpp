#include "driftwin/learn/logistic.hpp"

#include "driftwin/core/errors.hpp"

namespace driftwin::learn {
namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Eigen::VectorXd linear_predictor(const Eigen::VectorXd& w, const Eigen::MatrixXd& x) {
  return (x * w.tail(x.cols())).array() + w[0];
}

void check_dims(const Eigen::VectorXd& w, const Eigen::MatrixXd& x) {
  if (w.size() != x.cols() + 1) {
    throw SchemaError("logistic: weight length " + std::to_string(w.size()) + " does not match " +
                      std::to_string(x.cols()) + " features plus intercept");
  }
}

}  // namespace

double logistic_loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2) {
  check_dims(w, x);
  const Eigen::VectorXd eta = linear_predictor(w, x);
  double nll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) nll += softplus(eta[i]) - y[i] * eta[i];
  return nll / static_cast<double>(x.rows()) + 0.5 * l2 * w.tail(x.cols()).squaredNorm();
}

Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double l2) {
  check_dims(w, x);
  const Eigen::VectorXd eta = linear_predictor(w, x);
  Eigen::VectorXd resid(eta.size());
  for (Index i = 0; i < eta.size(); ++i) resid[i] = sigmoid(eta[i]) - y[i];
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Eigen::VectorXd g(w.size());
  g[0] = resid.sum() * inv_n;
  g.tail(x.cols()) = (x.transpose() * resid) * inv_n + l2 * w.tail(x.cols());
  return g;
}

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LogisticOptions& opts) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 2 || y.size() != n) throw DegenerateFitError("logistic: need at least two labelled rows");
  const double rate = y.mean();
  if (rate <= 0.0 || rate >= 1.0) throw DegenerateFitError("logistic: training labels contain a single class");

  LogisticModel model;
  model.weights = Eigen::VectorXd::Zero(p + 1);
  model.weights[0] = std::log(rate / (1.0 - rate));
  const double inv_n = 1.0 / static_cast<double>(n);

  double loss = logistic_loss(model.weights, x, y, opts.l2);
  Eigen::VectorXd grad = logistic_gradient(model.weights, x, y, opts.l2);
  model.final_gradient_norm = grad.norm();

  Eigen::VectorXd mu(n), wts(n);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (model.final_gradient_norm <= opts.tol) {
      model.converged = true;
      break;
    }
    model.iterations = iter + 1;
    const Eigen::VectorXd eta = linear_predictor(model.weights, x);
    for (Index i = 0; i < n; ++i) {
      mu[i] = sigmoid(eta[i]);
      wts[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
    }
    // Hessian of the mean penalized loss in block form [intercept | features].
    Eigen::MatrixXd h(p + 1, p + 1);
    const Eigen::MatrixXd wx = wts.asDiagonal() * x;
    h(0, 0) = wts.sum() * inv_n;
    h.block(1, 0, p, 1) = wx.colwise().sum().transpose() * inv_n;
    h.block(0, 1, 1, p) = h.block(1, 0, p, 1).transpose();
    h.block(1, 1, p, p).noalias() = x.transpose() * wx * inv_n;
    h.block(1, 1, p, p).diagonal().array() += opts.l2;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = grad;

    // Step halving until the loss does not increase.
    double scale = 1.0;
    Eigen::VectorXd candidate = model.weights - step;
    double cand_loss = logistic_loss(candidate, x, y, opts.l2);
    for (int halvings = 0; halvings < 30 && !(cand_loss <= loss); ++halvings) {
      scale *= 0.5;
      candidate = model.weights - scale * step;
      cand_loss = logistic_loss(candidate, x, y, opts.l2);
    }
    if (!(cand_loss <= loss)) break;  // no descent possible at machine precision
    model.weights = std::move(candidate);
    loss = cand_loss;
    grad = logistic_gradient(model.weights, x, y, opts.l2);
    model.final_gradient_norm = grad.norm();
  }
  if (model.final_gradient_norm <= opts.tol) model.converged = true;
  return model;
}

LogisticModel fit_logistic(const PeriodDataset& train, const LogisticOptions& opts) {
  return fit_logistic(train.features(), train.labels(), opts);
}

Eigen::VectorXd predict_proba(const LogisticModel& model, const Eigen::MatrixXd& x) {
  check_dims(model.weights, x);
  Eigen::VectorXd eta = linear_predictor(model.weights, x);
  for (Index i = 0; i < eta.size(); ++i) eta[i] = sigmoid(eta[i]);
  return eta;
}

}  // namespace driftwin::learn
