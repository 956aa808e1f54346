#include "driftwin/metrics/covariate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "driftwin/core/errors.hpp"

namespace driftwin::metrics {

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw MetricError("ks: both samples must be non-empty");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Advance past every copy of the smallest pending value before comparing,
  // so tied values across samples are evaluated at the same breakpoint.
  while (i < x.size() && j < y.size()) {
    const double z = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == z) ++i;
    while (j < y.size() && y[j] == z) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  // Once one sample is exhausted its ECDF is 1; the gap can only shrink.
  return d;
}

double covariate_shift_continuous(const Eigen::MatrixXd& train_cont, const Eigen::MatrixXd& test_cont,
                                  const PcaBasis& basis) {
  if (train_cont.cols() != basis.input_dim() || test_cont.cols() != basis.input_dim()) {
    throw SchemaError("covariate shift: continuous block does not match the PCA basis");
  }
  const Eigen::MatrixXd ptrain = basis.project(train_cont);
  const Eigen::MatrixXd ptest = basis.project(test_cont);
  double total = 0.0;
  for (Index c = 0; c < basis.dims(); ++c) {
    total += ks_statistic(std::span<const double>(ptrain.col(c).data(), static_cast<std::size_t>(ptrain.rows())),
                          std::span<const double>(ptest.col(c).data(), static_cast<std::size_t>(ptest.rows())));
  }
  return total / static_cast<double>(basis.dims());
}

BinaryFeatureShift binary_feature_shift(std::span<const double> train, std::span<const double> test) {
  if (train.empty() || test.empty()) throw MetricError("binary shift: both samples must be non-empty");
  double a1 = 0.0, b1 = 0.0;
  for (double v : train) a1 += v;
  for (double v : test) b1 += v;
  const double na = static_cast<double>(train.size());
  const double nb = static_cast<double>(test.size());
  const double a0 = na - a1;
  const double b0 = nb - b1;

  BinaryFeatureShift out;
  out.delta_p = std::fabs(a1 / na - b1 / nb);

  const double total = na + nb;
  const double c0 = a0 + b0;
  const double c1 = a1 + b1;
  if (c0 == 0.0 || c1 == 0.0) return out;  // constant column: chi^2 = 0
  const double observed[2][2] = {{a0, a1}, {b0, b1}};
  const double row[2] = {na, nb};
  const double col[2] = {c0, c1};
  double chi2 = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double expected = row[r] * col[c] / total;
      const double diff = observed[r][c] - expected;
      chi2 += diff * diff / expected;
    }
  }
  // min(r - 1, c - 1) = 1 for a 2x2 table.
  out.cramers_v = std::min(1.0, std::sqrt(chi2 / total));
  return out;
}

double covariate_shift_binary(const Eigen::MatrixXd& train_bin, const Eigen::MatrixXd& test_bin) {
  if (train_bin.cols() != test_bin.cols()) throw SchemaError("binary shift: column counts differ");
  if (train_bin.cols() == 0) throw MetricError("binary shift: no binary features");
  double dp = 0.0, v = 0.0;
  for (Index j = 0; j < train_bin.cols(); ++j) {
    const auto s = binary_feature_shift(
        std::span<const double>(train_bin.col(j).data(), static_cast<std::size_t>(train_bin.rows())),
        std::span<const double>(test_bin.col(j).data(), static_cast<std::size_t>(test_bin.rows())));
    dp += s.delta_p;
    v += s.cramers_v;
  }
  const double d = static_cast<double>(train_bin.cols());
  return 0.5 * (dp / d + v / d);
}

}  // namespace driftwin::metrics
