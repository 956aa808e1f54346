#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftwin/core/errors.hpp"
#include "driftwin/learn/logistic.hpp"
#include "driftwin/metrics/concept.hpp"
#include "driftwin/metrics/pca.hpp"
#include "support.hpp"

namespace driftwin::metrics {
namespace {

// KL form in long double: JS = (KL(p||m) + KL(q||m)) / 2 with natural logs,
// converted to bits.
long double js_reference(long double p, long double q) {
  const long double m = (p + q) / 2;
  auto term = [](long double a, long double b) { return a > 0 ? a * std::log(a / b) : 0.0L; };
  const long double kl_p = term(p, m) + term(1 - p, 1 - m);
  const long double kl_q = term(q, m) + term(1 - q, 1 - m);
  return (kl_p + kl_q) / (2 * std::log(2.0L));
}

TEST(Js, MatchesHighPrecisionOnGrid) {
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      const double p = i / 10.0, q = j / 10.0;
      EXPECT_NEAR(js_bernoulli(p, q), static_cast<double>(js_reference(p, q)), 1e-12) << p << " " << q;
    }
  }
}

TEST(Js, Bounds) {
  EXPECT_EQ(js_bernoulli(0.0, 1.0), 1.0);
  EXPECT_EQ(js_bernoulli(0.3, 0.3), 0.0);
  EXPECT_THROW(js_bernoulli(-0.1, 0.5), MetricError);
  EXPECT_THROW(js_bernoulli(0.5, 1.1), MetricError);
}

TEST(Js, DiscreteAgreesWithBernoulli) {
  Eigen::Vector2d p(0.3, 0.7), q(0.8, 0.2);
  EXPECT_NEAR(js_discrete(p, q), js_bernoulli(0.7, 0.2), 1e-15);
  // Unnormalized counts are normalized first.
  EXPECT_NEAR(js_discrete(p * 10, q * 3), js_bernoulli(0.7, 0.2), 1e-15);
  EXPECT_THROW(js_discrete(p, Eigen::Vector3d(1, 1, 1)), MetricError);
}

TEST(Oracle, SelfShiftIsZero) {
  RngStream rng(1, {});
  for (int rep = 0; rep < 100; ++rep) {
    const Index d = 1 + static_cast<Index>(rng.below(20));
    const auto x = testing::normal_matrix(rng, 20 + static_cast<Index>(rng.below(100)), d);
    Eigen::VectorXd beta(d + 1);
    for (Index j = 0; j <= d; ++j) beta[j] = rng.uniform(-3, 3);
    EXPECT_EQ(concept_shift_oracle(beta, beta, x), 0.0);
  }
}

TEST(Oracle, MatchesRowwiseDefinition) {
  RngStream rng(2, {});
  const auto x = testing::normal_matrix(rng, 50, 3);
  Eigen::Vector4d a(0.1, 1, -1, 0.5), b(-0.2, 0.5, 0.3, 0.5);
  double expected = 0;
  for (Index i = 0; i < 50; ++i) {
    const double pa = learn::sigmoid(a[0] + x.row(i).dot(a.tail(3)));
    const double pb = learn::sigmoid(b[0] + x.row(i).dot(b.tail(3)));
    expected += static_cast<double>(js_reference(pa, pb)) / 50;
  }
  EXPECT_NEAR(concept_shift_oracle(a, b, x), expected, 1e-13);
  EXPECT_THROW(concept_shift_oracle(a, b.head(3), x), SchemaError);
}

// Sorts every reference row by exact squared distance, lower index first on ties.
Eigen::VectorXd brute_knn(const Eigen::MatrixXd& ref, const Eigen::VectorXd& y, const Eigen::MatrixXd& q, int k) {
  Eigen::VectorXd out(q.rows());
  std::vector<Index> idx(static_cast<std::size_t>(ref.rows()));
  for (Index i = 0; i < q.rows(); ++i) {
    std::vector<double> dist(static_cast<std::size_t>(ref.rows()));
    for (Index r = 0; r < ref.rows(); ++r) dist[static_cast<std::size_t>(r)] = (ref.row(r) - q.row(i)).squaredNorm();
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
      return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
    });
    double s = 0;
    for (int j = 0; j < k; ++j) s += y[idx[static_cast<std::size_t>(j)]];
    out[i] = s / k;
  }
  return out;
}

TEST(Knn, MatchesBruteForceOnContinuousData) {
  RngStream rng(3, {});
  for (int rep = 0; rep < 10; ++rep) {
    const Index n_ref = 50 + static_cast<Index>(rng.below(400));
    const Index n_q = 1 + static_cast<Index>(rng.below(300));
    const Index d = 1 + static_cast<Index>(rng.below(12));
    const auto ref = testing::normal_matrix(rng, n_ref, d);
    const auto q = testing::normal_matrix(rng, n_q, d);
    Eigen::VectorXd y(n_ref);
    for (Index i = 0; i < n_ref; ++i) y[i] = rng.bernoulli(0.5);
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_ref)));
    EXPECT_EQ(knn_conditional_estimate(ref, y, q, k), brute_knn(ref, y, q, k)) << "rep " << rep;
  }
}

TEST(Knn, TiesGoToLowerIndex) {
  // Integer grid points far from the origin: many exact distance ties, and
  // large norms stress the single-precision prefilter.
  RngStream rng(4, {});
  for (double offset : {0.0, 1000.0}) {
    const Index n_ref = 300, n_q = 130, d = 3;
    Eigen::MatrixXd ref(n_ref, d), q(n_q, d);
    for (Index i = 0; i < n_ref; ++i) {
      for (Index j = 0; j < d; ++j) ref(i, j) = offset + static_cast<double>(rng.below(4));
    }
    for (Index i = 0; i < n_q; ++i) {
      for (Index j = 0; j < d; ++j) q(i, j) = offset + static_cast<double>(rng.below(4));
    }
    Eigen::VectorXd y(n_ref);
    for (Index i = 0; i < n_ref; ++i) y[i] = rng.bernoulli(0.5);
    for (int k : {1, 7, 25, 299}) {
      EXPECT_EQ(knn_conditional_estimate(ref, y, q, k), brute_knn(ref, y, q, k)) << offset << " k=" << k;
    }
  }
}

TEST(Knn, BinaryColumnsAndDuplicates) {
  RngStream rng(5, {});
  const auto ref = testing::bernoulli_matrix(rng, 200, 5);
  Eigen::VectorXd y(200);
  for (Index i = 0; i < 200; ++i) y[i] = rng.bernoulli(0.3);
  EXPECT_EQ(knn_conditional_estimate(ref, y, ref, 30), brute_knn(ref, y, ref, 30));
  EXPECT_THROW(knn_conditional_estimate(ref, y, ref, 0), MetricError);
  EXPECT_THROW(knn_conditional_estimate(ref, y, ref, 201), MetricError);
  EXPECT_THROW(knn_conditional_estimate(ref, y, ref.leftCols(4), 3), SchemaError);
}

TEST(Knn, DefaultK) {
  EXPECT_EQ(default_knn_k(100, 100), 25);
  EXPECT_EQ(default_knn_k(10000, 5000), 100);
  EXPECT_EQ(default_knn_k(10001, 5000), 100);
  EXPECT_EQ(default_knn_k(20, 100), 20);
  EXPECT_EQ(default_knn_k(10000, 30), 30);
}

TEST(Knn, SelfShiftIsExactlyZero) {
  RngStream rng(6, {});
  for (int rep = 0; rep < 5; ++rep) {
    const auto data = testing::random_period(rng, 1, 150, 3, 2);
    const auto basis = fit_pca(data.cont());
    EXPECT_EQ(concept_shift_knn(data, data, 25, basis), 0.0);
    EXPECT_EQ(concept_shift_knn(data, data, 25, basis, KnnJsMode::Histogram), 0.0);
  }
}

TEST(Knn, ShiftDetectsFlippedLabels) {
  RngStream rng(7, {});
  auto train = testing::random_period(rng, 1, 800, 2, 0);
  auto test = testing::random_period(rng, 2, 800, 2, 0);
  auto relabel = [&](const PeriodDataset& p, double sign) {
    Eigen::VectorXd y(p.rows());
    for (Index i = 0; i < p.rows(); ++i) y[i] = rng.bernoulli(learn::sigmoid(3 * sign * p.cont()(i, 0)));
    return PeriodDataset(p.period(), p.schema(), p.cont(), p.bin(), y);
  };
  const auto same = relabel(test, 1), flipped = relabel(test, -1);
  train = relabel(train, 1);
  const auto basis = fit_pca(train.cont());
  const double small = concept_shift_knn(train, same, 40, basis);
  const double large = concept_shift_knn(train, flipped, 40, basis);
  EXPECT_LT(small, 0.05);
  EXPECT_GT(large, 0.3);
}

TEST(Knn, HistogramModeMatchesManualBinning) {
  RngStream rng(8, {});
  const auto train = testing::random_period(rng, 1, 200, 2, 1);
  const auto test = testing::random_period(rng, 2, 150, 2, 1);
  const auto basis = fit_pca(train.cont());
  const auto et = knn_embedding(train, basis), eq = knn_embedding(test, basis);
  const auto a = brute_knn(et, train.labels(), eq, 20);
  const auto b = brute_knn(eq, test.labels(), eq, 20);
  Eigen::VectorXd ha = Eigen::VectorXd::Zero(20), hb = Eigen::VectorXd::Zero(20);
  for (Index i = 0; i < a.size(); ++i) {
    ha[std::min(19, static_cast<int>(a[i] * 20))] += 1;
    hb[std::min(19, static_cast<int>(b[i] * 20))] += 1;
  }
  EXPECT_NEAR(concept_shift_knn(train, test, 20, basis, KnnJsMode::Histogram), js_discrete(ha, hb), 1e-15);
  double pw = 0;
  for (Index i = 0; i < a.size(); ++i) pw += js_bernoulli(a[i], b[i]) / static_cast<double>(a.size());
  EXPECT_NEAR(concept_shift_knn(train, test, 20, basis), pw, 1e-12);
}

TEST(Knn, EmbeddingLayout) {
  RngStream rng(9, {});
  const auto data = testing::random_period(rng, 1, 60, 3, 2);
  const auto basis = fit_pca(data.cont(), 1.0);
  const auto e = knn_embedding(data, basis);
  ASSERT_EQ(e.cols(), basis.dims() + 2);
  EXPECT_EQ(e.leftCols(basis.dims()), basis.project(data.cont()));
  EXPECT_EQ(e.rightCols(2), data.bin());
  EXPECT_EQ(knn_embedding(data, std::nullopt), data.bin());
  EXPECT_EQ(parse_knn_js_mode(to_string(KnnJsMode::Histogram)), KnnJsMode::Histogram);
  EXPECT_THROW(parse_knn_js_mode("bogus"), ConfigError);
}

}  // namespace
}  // namespace driftwin::metrics
