#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftwin/core/dataset.hpp"
#include "driftwin/metrics/concept.hpp"

namespace driftwin::metrics {

struct ShiftOptions {
  double pca_variance = 0.95;
  std::optional<int> k;  // default: default_knn_k
  bool knn = true;       // the kNN estimator dominates runtime on wide windows
  KnnJsMode js_mode = KnnJsMode::Pointwise;
};

// Covariate and concept shift between one training window and the test set.
// concept_resid is filled later, once every window of a run is available.
struct ShiftReport {
  double cov_cont = 0.0;
  double cov_bin = 0.0;
  double cov_unified = 0.0;
  std::optional<double> concept_raw;
  std::optional<double> concept_resid;
  std::optional<double> concept_oracle;
  int d_pca = 0;
  int k = 0;
  std::vector<std::string> warnings;
};

// Standardization/PCA is fit on `train` only; `test` is transformed with it.
ShiftReport compute_shift_report(const PeriodDataset& train, const PeriodDataset& test, const ShiftOptions& opts);

// Same, reusing a basis fit elsewhere (e.g. on the full window when `train`
// is one of its subgroups). An empty basis means no continuous block.
ShiftReport compute_shift_report(const PeriodDataset& train, const PeriodDataset& test, const ShiftOptions& opts,
                                 const std::optional<PcaBasis>& fixed_basis);

}  // namespace driftwin::metrics
