#include "driftwin/metrics/forest.hpp"

#include <algorithm>
#include <numeric>

#include "driftwin/core/errors.hpp"

namespace driftwin::metrics {

int RegressionForest::grow(Tree& tree, std::vector<std::pair<double, double>>& sample, std::size_t begin,
                           std::size_t end, int depth, const ForestOptions& opts) {
  const std::size_t n = end - begin;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    sum += sample[i].second;
    sum_sq += sample[i].second * sample[i].second;
  }
  const int id = static_cast<int>(tree.size());
  tree.push_back(Node{0.0, sum / static_cast<double>(n), -1, -1});

  const auto min_leaf = static_cast<std::size_t>(std::max(1, opts.min_leaf));
  if (n < 2 * min_leaf || (opts.max_depth > 0 && depth >= opts.max_depth)) return id;

  // Sample is sorted by x within [begin, end); scan prefix sums for the split
  // with the largest SSE reduction.
  const double parent_sse = sum_sq - sum * sum / static_cast<double>(n);
  if (parent_sse <= 0.0) return id;
  double best_gain = 0.0;
  std::size_t best_cut = 0;
  double left_sum = 0.0;
  for (std::size_t cut = 1; cut < n; ++cut) {
    left_sum += sample[begin + cut - 1].second;
    if (cut < min_leaf || n - cut < min_leaf) continue;
    if (sample[begin + cut - 1].first == sample[begin + cut].first) continue;
    const double nl = static_cast<double>(cut);
    const double nr = static_cast<double>(n - cut);
    const double right_sum = sum - left_sum;
    const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - sum * sum / static_cast<double>(n);
    if (gain > best_gain) {
      best_gain = gain;
      best_cut = cut;
    }
  }
  if (best_cut == 0) return id;
  const double threshold = 0.5 * (sample[begin + best_cut - 1].first + sample[begin + best_cut].first);
  const int left = grow(tree, sample, begin, begin + best_cut, depth + 1, opts);
  const int right = grow(tree, sample, begin + best_cut, end, depth + 1, opts);
  tree[static_cast<std::size_t>(id)].threshold = threshold;
  tree[static_cast<std::size_t>(id)].left = left;
  tree[static_cast<std::size_t>(id)].right = right;
  return id;
}

void RegressionForest::fit(std::span<const double> x, std::span<const double> y, const ForestOptions& opts,
                           const RngStream& rng) {
  if (x.size() != y.size() || x.empty()) throw MetricError("forest: inputs must be non-empty and aligned");
  if (opts.trees < 1) throw ConfigError("forest.trees: must be at least 1");
  const std::size_t n = x.size();
  trees_.assign(static_cast<std::size_t>(opts.trees), {});
  std::vector<std::pair<double, double>> sample(n);
  for (int t = 0; t < opts.trees; ++t) {
    RngStream tree_rng = rng.child(static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = opts.bootstrap ? static_cast<std::size_t>(tree_rng.below(n)) : i;
      sample[i] = {x[src], y[src]};
    }
    std::sort(sample.begin(), sample.end());
    grow(trees_[static_cast<std::size_t>(t)], sample, 0, n, 0, opts);
  }
}

double RegressionForest::predict(double x) const {
  double total = 0.0;
  for (const auto& tree : trees_) {
    int node = 0;
    while (tree[static_cast<std::size_t>(node)].left >= 0) {
      const auto& nd = tree[static_cast<std::size_t>(node)];
      node = x <= nd.threshold ? nd.left : nd.right;
    }
    total += tree[static_cast<std::size_t>(node)].value;
  }
  return total / static_cast<double>(trees_.size());
}

ResidualizeResult residualize_concept_shift(std::span<const std::pair<double, double>> pairs,
                                            const ForestOptions& opts, const RngStream& rng,
                                            std::size_t min_pairs) {
  ResidualizeResult out;
  out.residuals.reserve(pairs.size());
  if (pairs.size() < min_pairs) {
    out.fallback = true;
    for (const auto& p : pairs) out.residuals.push_back(p.second);
    return out;
  }
  std::vector<double> x, y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (const auto& [cov, raw] : pairs) {
    x.push_back(cov);
    y.push_back(raw);
  }
  RegressionForest forest;
  forest.fit(x, y, opts, rng);
  for (std::size_t i = 0; i < x.size(); ++i) out.residuals.push_back(y[i] - forest.predict(x[i]));
  return out;
}

}  // namespace driftwin::metrics
