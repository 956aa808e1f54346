#include "driftwin/learn/ols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "driftwin/core/errors.hpp"

namespace driftwin::learn {
namespace {

using Index = Eigen::Index;

constexpr double kRankTol = 1e-10;

Index column_rank(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(kRankTol);
  return qr.rank();
}

}  // namespace

std::optional<std::size_t> RegressionFit::index_of(const std::string& term) const {
  auto it = std::find(terms.begin(), terms.end(), term);
  if (it == terms.end()) return std::nullopt;
  return static_cast<std::size_t>(it - terms.begin());
}

double RegressionFit::coef(const std::string& term) const {
  auto i = index_of(term);
  if (!i) throw SchemaError("regression fit: no term '" + term + "'");
  return coefficients[static_cast<Index>(*i)];
}

double RegressionFit::p_value(const std::string& term) const {
  auto i = index_of(term);
  if (!i) throw SchemaError("regression fit: no term '" + term + "'");
  return p_values[static_cast<Index>(*i)];
}

double t_test_p_value(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0, 1.0);
}

RegressionFit ols_fit(const DesignSpec& spec, const DataTable& rows) {
  const std::size_t n = rows.rows();
  const auto& yv = rows.numeric(spec.response);

  std::vector<std::string> names{"(intercept)"};
  std::vector<Eigen::VectorXd> cols{Eigen::VectorXd::Ones(static_cast<Index>(n))};
  auto as_vec = [&](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())).eval();
  };
  for (const auto& term : spec.terms) {
    names.push_back(term);
    cols.push_back(as_vec(rows.numeric(term)));
  }
  for (const auto& [a, b] : spec.interactions) {
    names.push_back(a + ":" + b);
    cols.push_back(as_vec(rows.numeric(a)).cwiseProduct(as_vec(rows.numeric(b))));
  }
  if (spec.fixed_effect) {
    const auto& ids = rows.label(*spec.fixed_effect);
    const std::set<std::string> levels(ids.begin(), ids.end());
    for (auto it = levels.begin(); it != levels.end(); ++it) {
      if (it == levels.begin()) continue;  // reference level
      Eigen::VectorXd d(static_cast<Index>(n));
      for (std::size_t i = 0; i < n; ++i) d[static_cast<Index>(i)] = ids[i] == *it ? 1.0 : 0.0;
      names.push_back("fe[" + *it + "]");
      cols.push_back(std::move(d));
    }
  }
  if (n <= cols.size()) {
    throw DegenerateFitError("ols: " + std::to_string(n) + " rows cannot identify " + std::to_string(cols.size()) +
                             " columns");
  }

  // Greedy forward pass keeps each column that raises the rank.
  RegressionFit fit;
  Eigen::MatrixXd x(static_cast<Index>(n), 0);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    Eigen::MatrixXd trial(x.rows(), x.cols() + 1);
    trial << x, cols[j];
    if (column_rank(trial) > x.cols()) {
      x = std::move(trial);
      fit.terms.push_back(names[j]);
    } else {
      fit.dropped.push_back(names[j]);
    }
  }

  const Eigen::VectorXd y = as_vec(yv);
  const Index p = x.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  fit.coefficients = qr.solve(y);
  const Eigen::VectorXd resid = y - x * fit.coefficients;
  const double ssr = resid.squaredNorm();
  const double sst = (y.array() - y.mean()).matrix().squaredNorm();
  fit.n_obs = n;
  fit.df_residual = static_cast<int>(static_cast<Index>(n) - p);
  if (sst > 0.0) {
    fit.r_squared = std::clamp(1.0 - ssr / sst, 0.0, 1.0);
  } else {
    fit.r_squared = ssr <= std::numeric_limits<double>::epsilon() ? 1.0 : 0.0;
  }

  const double sigma2 = ssr / fit.df_residual;
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd diag = r_inv.rowwise().squaredNorm();  // diag((X'X)^-1)
  fit.standard_errors = (sigma2 * diag).cwiseSqrt();
  fit.t_values.resize(p);
  fit.p_values.resize(p);
  for (Index j = 0; j < p; ++j) {
    const double b = fit.coefficients[j];
    const double se = fit.standard_errors[j];
    double t = 0.0;
    if (se > 0.0) {
      t = b / se;
    } else if (b != 0.0) {
      t = std::copysign(std::numeric_limits<double>::infinity(), b);
    }
    fit.t_values[j] = t;
    fit.p_values[j] = (se > 0.0 || b != 0.0) ? t_test_p_value(t, fit.df_residual) : 1.0;
  }
  return fit;
}

std::array<std::vector<std::size_t>, 3> tertile_rows(const std::vector<double>& sizes) {
  std::vector<double> sorted = sizes;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  std::array<std::vector<std::size_t>, 3> out;
  if (sizes.empty()) return out;
  const double q1 = quantile(1.0 / 3.0);
  const double q2 = quantile(2.0 / 3.0);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::size_t bucket = sizes[i] <= q1 ? 0 : sizes[i] <= q2 ? 1 : 2;
    out[bucket].push_back(i);
  }
  return out;
}

std::array<RegressionFit, 3> tertile_split_fit(const DataTable& rows, const std::string& size_column,
                                               const DesignSpec& spec) {
  const auto buckets = tertile_rows(rows.numeric(size_column));
  std::array<RegressionFit, 3> fits;
  for (std::size_t b = 0; b < 3; ++b) {
    if (buckets[b].size() < 3) {
      throw DegenerateFitError("tertile " + std::to_string(b + 1) + " has " + std::to_string(buckets[b].size()) +
                               " rows; at least 3 required");
    }
    fits[b] = ols_fit(spec, rows.select_rows(buckets[b]));
  }
  return fits;
}

}  // namespace driftwin::learn
