#include <gtest/gtest.h>

#include "driftwin/core/errors.hpp"
#include "driftwin/metrics/pca.hpp"
#include "support.hpp"

namespace driftwin::metrics {
namespace {

TEST(Pca, ComponentsAreOrthonormalAndOrdered) {
  RngStream rng(1, {});
  Eigen::MatrixXd x = testing::normal_matrix(rng, 500, 6);
  x.col(1) = x.col(0) * 0.9 + x.col(1) * 0.3;
  const auto b = fit_pca(x, 1.0);
  EXPECT_EQ(b.dims(), 6);
  const Eigen::MatrixXd gram = b.components * b.components.transpose();
  EXPECT_TRUE(gram.isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-10));
  for (Index i = 1; i < b.dims(); ++i) {
    EXPECT_GE(b.explained_variance_ratio[i - 1], b.explained_variance_ratio[i]);
  }
  EXPECT_NEAR(b.explained_variance_ratio.sum(), 1.0, 1e-12);
}

TEST(Pca, ScoresAreUncorrelatedWithEigenvalueVariance) {
  RngStream rng(2, {});
  Eigen::MatrixXd x = testing::normal_matrix(rng, 400, 4);
  x.col(2) += 2.0 * x.col(3);
  x.col(0) = x.col(0) * 5.0 + Eigen::VectorXd::Constant(400, 3.0);
  const auto b = fit_pca(x, 1.0);
  const Eigen::MatrixXd s = b.project(x);
  const Eigen::MatrixXd cov = (s.transpose() * s) / 399.0;
  // Standardized inputs have total variance equal to the column count.
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(cov(i, i), 4.0 * b.explained_variance_ratio[i], 1e-9);
    for (Index j = 0; j < i; ++j) EXPECT_NEAR(cov(i, j), 0.0, 1e-9);
  }
  EXPECT_NEAR(s.colwise().mean().norm(), 0.0, 1e-12);
}

TEST(Pca, VarianceTargetPicksSmallestPrefix) {
  RngStream rng(3, {});
  Eigen::MatrixXd x = testing::normal_matrix(rng, 300, 5);
  for (double target : {0.3, 0.6, 0.95, 1.0}) {
    const auto b = fit_pca(x, target);
    const auto full = fit_pca(x, 1.0);
    double cum = 0;
    Index need = 0;
    while (need < 5 && cum < target) cum += full.explained_variance_ratio[need++];
    EXPECT_EQ(b.dims(), std::max<Index>(1, need)) << target;
  }
}

TEST(Pca, ZeroVarianceColumnsAreDropped) {
  RngStream rng(4, {});
  Eigen::MatrixXd x = testing::normal_matrix(rng, 100, 3);
  x.col(1).setConstant(7.0);
  const auto b = fit_pca(x);
  EXPECT_EQ(b.dropped, (std::vector<Index>{1}));
  EXPECT_EQ(b.kept, (std::vector<Index>{0, 2}));
  EXPECT_TRUE(b.project(x).allFinite());
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(10, 2, 1.0);
  EXPECT_THROW(fit_pca(c), MetricError);
  EXPECT_THROW(fit_pca(Eigen::MatrixXd::Zero(1, 2)), MetricError);
  EXPECT_THROW(b.project(Eigen::MatrixXd::Zero(3, 2)), SchemaError);
}

TEST(Pca, SignConventionIsDeterministic) {
  RngStream rng(5, {});
  Eigen::MatrixXd x = testing::normal_matrix(rng, 200, 4);
  const auto a = fit_pca(x);
  const auto b = fit_pca(x);
  EXPECT_EQ(a.components, b.components);
  for (Index r = 0; r < a.dims(); ++r) {
    Index arg = 0;
    a.components.row(r).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(a.components(r, arg), 0.0);
  }
}

}  // namespace
}  // namespace driftwin::metrics
