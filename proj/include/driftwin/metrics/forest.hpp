#pragma once

#include <span>
#include <utility>
#include <vector>

#include "driftwin/core/rng.hpp"

namespace driftwin::metrics {

struct ForestOptions {
  int trees = 200;
  int min_leaf = 5;
  int max_depth = 0;  // 0 = unlimited
  bool bootstrap = true;
};

// Regression forest on a single real input. Each tree draws its bootstrap
// sample from rng.child(tree), so the fit does not depend on tree order.
class RegressionForest {
 public:
  void fit(std::span<const double> x, std::span<const double> y, const ForestOptions& opts, const RngStream& rng);
  double predict(double x) const;
  std::size_t tree_count() const { return trees_.size(); }

 private:
  struct Node {
    double threshold = 0.0;  // go left when x <= threshold
    double value = 0.0;      // leaf mean
    int left = -1;
    int right = -1;
  };
  using Tree = std::vector<Node>;

  static int grow(Tree& tree, std::vector<std::pair<double, double>>& sample, std::size_t begin, std::size_t end,
                  int depth, const ForestOptions& opts);

  std::vector<Tree> trees_;
};

struct ResidualizeResult {
  std::vector<double> residuals;
  bool fallback = false;  // too few pairs; residuals are the raw scores
};

// Residual of raw concept shift after a forest regression on unified
// covariate shift: raw - f(cov). Pairs are (cov_unified, concept_raw).
ResidualizeResult residualize_concept_shift(std::span<const std::pair<double, double>> pairs,
                                            const ForestOptions& opts, const RngStream& rng,
                                            std::size_t min_pairs = 10);

}  // namespace driftwin::metrics
