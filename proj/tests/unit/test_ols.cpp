#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "driftwin/core/errors.hpp"
#include "driftwin/learn/ols.hpp"
#include "driftwin/learn/table.hpp"
#include "support.hpp"

namespace driftwin::learn {
namespace {

DataTable noiseless(RngStream& rng, std::size_t n) {
  std::vector<double> a(n), b(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform(-1, 1);
    b[i] = rng.normal();
    y[i] = 1.5 - 2.0 * a[i] + 0.25 * b[i] + 0.5 * a[i] * b[i];
  }
  DataTable t;
  t.add_numeric("y", y);
  t.add_numeric("a", a);
  t.add_numeric("b", b);
  return t;
}

TEST(Ols, NoiselessDataGivesExactFit) {
  RngStream rng(1, {});
  const auto t = noiseless(rng, 40);
  const auto fit = ols_fit({"y", {"a", "b"}, {{"a", "b"}}, std::nullopt}, t);
  ASSERT_EQ(fit.terms, (std::vector<std::string>{"(intercept)", "a", "b", "a:b"}));
  EXPECT_NEAR(fit.coef("(intercept)"), 1.5, 1e-12);
  EXPECT_NEAR(fit.coef("a"), -2.0, 1e-12);
  EXPECT_NEAR(fit.coef("b"), 0.25, 1e-12);
  EXPECT_NEAR(fit.coef("a:b"), 0.5, 1e-12);
  EXPECT_EQ(fit.r_squared, 1.0);
  EXPECT_EQ(fit.df_residual, 36);
}

TEST(Ols, StandardErrorsMatchClosedForm) {
  // Simple regression: se(slope) = sqrt(s^2 / Sxx).
  RngStream rng(2, {});
  const std::size_t n = 60;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(0, 10);
    y[i] = 3.0 + 0.7 * x[i] + rng.normal();
  }
  DataTable t;
  t.add_numeric("y", y);
  t.add_numeric("x", x);
  const auto fit = ols_fit({"y", {"x"}, {}, std::nullopt}, t);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ssr = 0, sst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ssr += std::pow(y[i] - icpt - slope * x[i], 2);
    sst += std::pow(y[i] - my, 2);
  }
  const double s2 = ssr / (n - 2);
  EXPECT_NEAR(fit.coef("x"), slope, 1e-10);
  EXPECT_NEAR(fit.standard_errors[1], std::sqrt(s2 / sxx), 1e-10);
  EXPECT_NEAR(fit.standard_errors[0], std::sqrt(s2 * (1.0 / n + mx * mx / sxx)), 1e-10);
  EXPECT_NEAR(fit.r_squared, 1 - ssr / sst, 1e-12);
  EXPECT_NEAR(fit.p_value("x"), t_test_p_value(slope / std::sqrt(s2 / sxx), n - 2), 1e-12);
}

TEST(Ols, TTestPValueKnownQuantiles) {
  // t = 2.228 is the two-sided 5% point at 10 degrees of freedom.
  EXPECT_NEAR(t_test_p_value(2.228138851986, 10), 0.05, 1e-9);
  EXPECT_NEAR(t_test_p_value(-1.959963984540, 1e9), 0.05, 1e-7);
  EXPECT_DOUBLE_EQ(t_test_p_value(0.0, 5), 1.0);
  EXPECT_EQ(t_test_p_value(INFINITY, 5), 0.0);
}

TEST(Ols, CollinearColumnIsDropped) {
  RngStream rng(3, {});
  auto t = noiseless(rng, 30);
  std::vector<double> twice = t.numeric("a");
  for (auto& v : twice) v *= 2;
  t.add_numeric("a2", twice);
  const auto fit = ols_fit({"y", {"a", "a2", "b"}, {}, std::nullopt}, t);
  EXPECT_EQ(fit.dropped, (std::vector<std::string>{"a2"}));
  EXPECT_FALSE(fit.has("a2"));
  EXPECT_TRUE(fit.has("b"));
}

TEST(Ols, FixedEffectsUseSmallestLevelAsReference) {
  RngStream rng(4, {});
  const std::size_t n = 90;
  std::vector<double> x(n), y(n);
  std::vector<std::string> inst(n);
  const std::map<std::string, double> shift{{"alpha", 0.0}, {"beta", 2.0}, {"gamma", -1.0}};
  const std::array<std::string, 3> names{"gamma", "alpha", "beta"};
  for (std::size_t i = 0; i < n; ++i) {
    inst[i] = names[i % 3];
    x[i] = rng.normal();
    y[i] = 1.0 + 0.5 * x[i] + shift.at(inst[i]);
  }
  DataTable t;
  t.add_numeric("y", y);
  t.add_numeric("x", x);
  t.add_label("inst", inst);
  const auto fit = ols_fit({"y", {"x"}, {}, std::string("inst")}, t);
  EXPECT_FALSE(fit.has("fe[alpha]"));
  EXPECT_NEAR(fit.coef("fe[beta]"), 2.0, 1e-10);
  EXPECT_NEAR(fit.coef("fe[gamma]"), -1.0, 1e-10);
  EXPECT_NEAR(fit.coef("(intercept)"), 1.0, 1e-10);
}

TEST(Ols, TooFewRowsThrows) {
  DataTable t;
  t.add_numeric("y", {1, 2});
  t.add_numeric("x", {0, 1});
  EXPECT_THROW(ols_fit({"y", {"x"}, {}, std::nullopt}, t), DegenerateFitError);
  EXPECT_THROW(ols_fit({"y", {"z"}, {}, std::nullopt}, t), SchemaError);
}

TEST(Ols, TertileRowsSplitAtQuantiles) {
  const std::vector<double> sizes{9, 1, 5, 3, 7, 2, 8, 4, 6};
  const auto b = tertile_rows(sizes);
  // Quantiles at 1/3 and 2/3 are 3.667 and 6.333.
  EXPECT_EQ(b[0], (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_EQ(b[1], (std::vector<std::size_t>{2, 7, 8}));
  EXPECT_EQ(b[2], (std::vector<std::size_t>{0, 4, 6}));
}

TEST(Ols, TertileSplitFitsEachBucket) {
  RngStream rng(5, {});
  auto t = noiseless(rng, 60);
  std::vector<double> size(60);
  for (std::size_t i = 0; i < 60; ++i) size[i] = static_cast<double>(i);
  t.add_numeric("size", size);
  const auto fits = tertile_split_fit(t, "size", {"y", {"a", "b"}, {{"a", "b"}}, std::nullopt});
  for (const auto& f : fits) {
    EXPECT_EQ(f.n_obs, 20u);
    EXPECT_NEAR(f.coef("a"), -2.0, 1e-10);
  }
  DataTable tiny;
  tiny.add_numeric("y", {1, 2, 3, 4});
  tiny.add_numeric("x", {1, 3, 2, 5});
  EXPECT_THROW(tertile_split_fit(tiny, "x", {"y", {"x"}, {}, std::nullopt}), DegenerateFitError);
}

TEST(Ols, NullPValuesAreUniform) {
  RngStream rng(6, {});
  std::vector<double> p;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> x(50), y(50);
    for (int i = 0; i < 50; ++i) {
      x[static_cast<std::size_t>(i)] = rng.normal();
      y[static_cast<std::size_t>(i)] = rng.normal();
    }
    DataTable t;
    t.add_numeric("y", y);
    t.add_numeric("x", x);
    p.push_back(ols_fit({"y", {"x"}, {}, std::nullopt}, t).p_value("x"));
  }
  std::sort(p.begin(), p.end());
  double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, std::fabs(p[i] - static_cast<double>(i) / p.size()),
                  std::fabs(p[i] - static_cast<double>(i + 1) / p.size())});
  }
  EXPECT_LT(d, 0.05);
}

TEST(DataTable, RejectsMismatchedLengthsAndMissingColumns) {
  DataTable t;
  t.add_numeric("a", {1, 2, 3});
  EXPECT_THROW(t.add_numeric("b", {1, 2}), SchemaError);
  EXPECT_THROW(t.numeric("zz"), SchemaError);
  t.add_label("id", {"x", "y", "z"});
  const std::vector<std::size_t> rows{2, 0};
  const auto s = t.select_rows(rows);
  EXPECT_EQ(s.numeric("a"), (std::vector<double>{3, 1}));
  EXPECT_EQ(s.label("id"), (std::vector<std::string>{"z", "x"}));
  EXPECT_EQ(s.column_order(), (std::vector<std::string>{"a", "id"}));
}

}  // namespace
}  // namespace driftwin::learn
