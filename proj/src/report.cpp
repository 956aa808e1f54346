#include "driftwin/metrics/report.hpp"

#include <algorithm>

#include "driftwin/core/errors.hpp"
#include "driftwin/metrics/covariate.hpp"

namespace driftwin::metrics {
namespace {

ShiftReport finish_report(const PeriodDataset& train, const PeriodDataset& test, const ShiftOptions& opts,
                          const std::optional<PcaBasis>& basis, ShiftReport rep) {
  if (basis) {
    rep.d_pca = static_cast<int>(basis->dims());
    rep.cov_cont = covariate_shift_continuous(train.cont(), test.cont(), *basis);
  }
  if (train.bin().cols() > 0) {
    rep.cov_bin = covariate_shift_binary(train.bin(), test.bin());
  } else {
    rep.warnings.push_back("no binary features: cov_bin set to 0");
  }
  rep.cov_unified = covariate_shift_unified(rep.cov_cont, rep.cov_bin);

  if (opts.knn) {
    const int cap = static_cast<int>(std::min(train.rows(), test.rows()));
    const int k = opts.k ? std::min(*opts.k, cap) : default_knn_k(train.rows(), test.rows());
    if (k < 1) {
      rep.warnings.push_back("insufficient rows for kNN concept shift");
    } else {
      rep.k = k;
      rep.concept_raw = concept_shift_knn(train, test, k, basis, opts.js_mode);
    }
  }
  return rep;
}

}  // namespace

ShiftReport compute_shift_report(const PeriodDataset& train, const PeriodDataset& test, const ShiftOptions& opts) {
  if (!(train.schema() == test.schema())) throw SchemaError("shift report: train and test schemas differ");
  ShiftReport rep;
  std::optional<PcaBasis> basis;
  if (train.cont().cols() > 0) {
    try {
      basis = fit_pca(train.cont(), opts.pca_variance);
      if (!basis->dropped.empty()) {
        rep.warnings.push_back(std::to_string(basis->dropped.size()) + " zero-variance continuous feature(s) excluded");
      }
    } catch (const MetricError& e) {
      rep.warnings.push_back(std::string("cov_cont set to 0: ") + e.what());
    }
  } else {
    rep.warnings.push_back("no continuous features: cov_cont set to 0");
  }
  return finish_report(train, test, opts, basis, std::move(rep));
}

ShiftReport compute_shift_report(const PeriodDataset& train, const PeriodDataset& test, const ShiftOptions& opts,
                                 const std::optional<PcaBasis>& fixed_basis) {
  if (!(train.schema() == test.schema())) throw SchemaError("shift report: train and test schemas differ");
  return finish_report(train, test, opts, fixed_basis, ShiftReport{});
}

}  // namespace driftwin::metrics
