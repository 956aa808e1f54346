#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "driftwin/learn/table.hpp"

namespace driftwin::learn {

// response ~ 1 + terms + a:b interactions [+ fixed-effect dummies].
struct DesignSpec {
  std::string response;
  std::vector<std::string> terms;
  std::vector<std::pair<std::string, std::string>> interactions;
  std::optional<std::string> fixed_effect;  // label column; reference = smallest level
};

struct RegressionFit {
  std::vector<std::string> terms;  // "(intercept)", terms, "a:b", "fe[level]"
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd t_values;
  Eigen::VectorXd p_values;
  double r_squared = 0.0;
  std::size_t n_obs = 0;
  int df_residual = 0;
  std::vector<std::string> dropped;  // collinear columns removed before fitting

  std::optional<std::size_t> index_of(const std::string& term) const;
  bool has(const std::string& term) const { return index_of(term).has_value(); }
  double coef(const std::string& term) const;
  double p_value(const std::string& term) const;
};

// Ordinary least squares via Householder QR, classical standard errors and
// two-sided t-test p values with n - p degrees of freedom. Columns that are
// linearly dependent on earlier ones are dropped and listed in `dropped`.
// Throws DegenerateFitError when n_obs does not exceed the column count.
RegressionFit ols_fit(const DesignSpec& spec, const DataTable& rows);

// Two-sided p value of a t statistic.
double t_test_p_value(double t, double df);

// Splits rows into size tertiles (boundaries at the 1/3 and 2/3 quantiles of
// `size_column`, values equal to a boundary go to the lower tertile) and fits
// each. Throws DegenerateFitError when a tertile has fewer than 3 rows.
std::array<RegressionFit, 3> tertile_split_fit(const DataTable& rows, const std::string& size_column,
                                               const DesignSpec& spec);
std::array<std::vector<std::size_t>, 3> tertile_rows(const std::vector<double>& sizes);

}  // namespace driftwin::learn
