#include <gtest/gtest.h>

#include <cmath>

#include "driftwin/core/errors.hpp"
#include "driftwin/metrics/forest.hpp"
#include "support.hpp"

namespace driftwin::metrics {
namespace {

TEST(Forest, DeterministicForSameStream) {
  RngStream rng(1, {});
  const auto x = testing::random_vector(rng, 300);
  std::vector<double> y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = std::sin(6 * x[i]) + 0.1 * rng.normal();
  RegressionForest a, b, c;
  a.fit(x, y, {}, RngStream(5, {1}));
  b.fit(x, y, {}, RngStream(5, {1}));
  c.fit(x, y, {}, RngStream(6, {1}));
  EXPECT_EQ(a.tree_count(), 200u);
  bool differs = false;
  for (double q = 0; q <= 1; q += 0.01) {
    EXPECT_EQ(a.predict(q), b.predict(q));
    differs |= a.predict(q) != c.predict(q);
  }
  EXPECT_TRUE(differs);
}

TEST(Forest, FitsSmoothFunction) {
  RngStream rng(2, {});
  const auto x = testing::random_vector(rng, 2000);
  std::vector<double> y(2000);
  for (std::size_t i = 0; i < 2000; ++i) y[i] = 2 * x[i] * x[i] + 0.05 * rng.normal();
  RegressionForest f;
  f.fit(x, y, {}, RngStream(3, {}));
  for (double q : {0.1, 0.4, 0.8}) EXPECT_NEAR(f.predict(q), 2 * q * q, 0.05);
}

TEST(Forest, SingleTreeWithoutBootstrapRespectsMinLeaf) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(i < 10 ? 0.0 : 1.0);
  }
  ForestOptions o;
  o.trees = 1;
  o.bootstrap = false;
  o.min_leaf = 5;
  RegressionForest f;
  f.fit(x, y, o, RngStream(1, {}));
  EXPECT_DOUBLE_EQ(f.predict(3), 0.0);
  EXPECT_DOUBLE_EQ(f.predict(15), 1.0);
  o.max_depth = 0;
  o.min_leaf = 20;
  RegressionForest stump;
  stump.fit(x, y, o, RngStream(1, {}));
  EXPECT_DOUBLE_EQ(stump.predict(0), 0.5);
  o.trees = 0;
  EXPECT_THROW(stump.fit(x, y, o, RngStream(1, {})), ConfigError);
}

TEST(Residualize, RemovesCovariateDependence) {
  RngStream rng(4, {});
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 400; ++i) {
    const double cov = rng.uniform();
    pairs.emplace_back(cov, 0.5 * cov + 0.02 * rng.normal());
  }
  const auto r = residualize_concept_shift(pairs, {}, RngStream(1, {}));
  EXPECT_FALSE(r.fallback);
  ASSERT_EQ(r.residuals.size(), 400u);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 400; ++i) {
    mx += pairs[i].first / 400;
    my += r.residuals[i] / 400;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < 400; ++i) {
    sxy += (pairs[i].first - mx) * (r.residuals[i] - my);
    sxx += std::pow(pairs[i].first - mx, 2);
    syy += std::pow(r.residuals[i] - my, 2);
  }
  EXPECT_LT(std::fabs(sxy / std::sqrt(sxx * syy)), 0.2);
}

TEST(Residualize, FallbackBelowMinimumPairs) {
  const std::vector<std::pair<double, double>> pairs{{0.1, 0.3}, {0.2, 0.5}};
  const auto r = residualize_concept_shift(pairs, {}, RngStream(1, {}));
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.residuals, (std::vector<double>{0.3, 0.5}));
}

}  // namespace
}  // namespace driftwin::metrics
