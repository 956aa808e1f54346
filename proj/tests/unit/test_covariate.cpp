#include <gtest/gtest.h>

#include <cmath>

#include "driftwin/core/errors.hpp"
#include "driftwin/metrics/covariate.hpp"
#include "driftwin/metrics/pca.hpp"
#include "support.hpp"

namespace driftwin::metrics {
namespace {

// Evaluates both ECDFs at every pooled sample point: O(n^2).
double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  auto ecdf = [](const std::vector<double>& s, double z) {
    std::size_t c = 0;
    for (double v : s) c += v <= z;
    return static_cast<double>(c) / static_cast<double>(s.size());
  };
  for (const auto* s : {&a, &b}) {
    for (double z : *s) d = std::max(d, std::fabs(ecdf(a, z) - ecdf(b, z)));
  }
  return d;
}

TEST(Ks, MatchesBruteForceEcdfScan) {
  RngStream rng(1, {});
  for (int rep = 0; rep < 100; ++rep) {
    const auto na = static_cast<std::size_t>(1 + rng.below(200));
    const auto nb = static_cast<std::size_t>(1 + rng.below(200));
    const bool ties = rep % 3 == 0;
    auto a = ties ? testing::tied_vector(rng, na, 8) : testing::random_vector(rng, na);
    auto b = ties ? testing::tied_vector(rng, nb, 8) : testing::random_vector(rng, nb, 0.2, 1.2);
    EXPECT_EQ(ks_statistic(a, b), brute_ks(a, b)) << "rep " << rep;
  }
}

TEST(Ks, KnownValuesAndErrors) {
  EXPECT_EQ(ks_statistic(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5}), 1.0);
  EXPECT_EQ(ks_statistic(std::vector<double>{1, 2}, std::vector<double>{1, 2}), 0.0);
  EXPECT_THROW(ks_statistic(std::vector<double>{}, std::vector<double>{1}), MetricError);
}

TEST(BinaryShift, CramersVMatchesClosedForm) {
  // For a 2x2 table V = |ad - bc| / sqrt((a+b)(c+d)(a+c)(b+d)).
  RngStream rng(2, {});
  for (int rep = 0; rep < 50; ++rep) {
    const auto train = testing::random_labels(rng, 50 + rng.below(100), rng.uniform(0.05, 0.95));
    const auto test = testing::random_labels(rng, 50 + rng.below(100), rng.uniform(0.05, 0.95));
    double a1 = 0, b1 = 0;
    for (double v : train) a1 += v;
    for (double v : test) b1 += v;
    const double a0 = train.size() - a1, b0 = test.size() - b1;
    const double denom = std::sqrt((a0 + a1) * (b0 + b1) * (a0 + b0) * (a1 + b1));
    const double v = denom > 0 ? std::fabs(a0 * b1 - a1 * b0) / denom : 0.0;
    const auto s = binary_feature_shift(train, test);
    EXPECT_NEAR(s.cramers_v, v, 1e-12);
    EXPECT_NEAR(s.delta_p, std::fabs(a1 / train.size() - b1 / test.size()), 1e-15);
  }
}

TEST(BinaryShift, ConstantColumnHasZeroV) {
  const std::vector<double> ones(10, 1.0);
  const auto s = binary_feature_shift(ones, ones);
  EXPECT_EQ(s.cramers_v, 0.0);
  EXPECT_EQ(s.delta_p, 0.0);
  const std::vector<double> zeros(5, 0.0);
  const auto full = binary_feature_shift(ones, zeros);
  EXPECT_DOUBLE_EQ(full.cramers_v, 1.0);
  EXPECT_DOUBLE_EQ(full.delta_p, 1.0);
}

TEST(BinaryShift, BlockScoreAveragesBothParts) {
  RngStream rng(3, {});
  const auto a = testing::bernoulli_matrix(rng, 80, 3, 0.3);
  const auto b = testing::bernoulli_matrix(rng, 60, 3, 0.6);
  double dp = 0, v = 0;
  for (Index j = 0; j < 3; ++j) {
    const std::vector<double> ca(a.col(j).data(), a.col(j).data() + 80);
    const std::vector<double> cb(b.col(j).data(), b.col(j).data() + 60);
    const auto s = binary_feature_shift(ca, cb);
    dp += s.delta_p / 3;
    v += s.cramers_v / 3;
  }
  EXPECT_NEAR(covariate_shift_binary(a, b), (dp + v) / 2, 1e-15);
  EXPECT_THROW(covariate_shift_binary(a, b.leftCols(2)), SchemaError);
}

TEST(ContinuousShift, MeanKsOverComponents) {
  RngStream rng(4, {});
  const auto train = testing::normal_matrix(rng, 300, 4);
  Eigen::MatrixXd test = testing::normal_matrix(rng, 200, 4);
  test.col(0).array() += 1.0;
  const auto basis = fit_pca(train);
  const Eigen::MatrixXd pa = basis.project(train), pb = basis.project(test);
  double expected = 0;
  for (Index c = 0; c < basis.dims(); ++c) {
    const std::vector<double> x(pa.col(c).data(), pa.col(c).data() + pa.rows());
    const std::vector<double> y(pb.col(c).data(), pb.col(c).data() + pb.rows());
    expected += brute_ks(x, y) / basis.dims();
  }
  EXPECT_NEAR(covariate_shift_continuous(train, test, basis), expected, 1e-15);
  EXPECT_EQ(covariate_shift_continuous(train, train, basis), 0.0);
  EXPECT_DOUBLE_EQ(covariate_shift_unified(0.2, 0.4), 0.3);
}

}  // namespace
}  // namespace driftwin::metrics
