#include "driftwin/learn/auc.hpp"

#include <algorithm>
#include <numeric>

#include "driftwin/core/errors.hpp"

namespace driftwin::learn {

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw SchemaError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based midranks of the positives.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] > 0.5) {
        rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw DegenerateFitError("auc: undefined with a single label class");
  const double np = static_cast<double>(positives);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(negatives));
}

std::optional<double> FairnessRecord::auc_of(const SubgroupKey& key) const {
  for (const auto& s : subgroups) {
    if (s.key == key) return s.value;
  }
  return std::nullopt;
}

FairnessRecord subgroup_auc(std::span<const double> scores, std::span<const double> labels,
                            const PeriodDataset& data, std::span<const SubgroupKey> groups,
                            const SupportRule& rule) {
  if (groups.empty()) throw SchemaError("subgroup_auc: no subgroups given");
  if (scores.size() != static_cast<std::size_t>(data.rows()) || labels.size() != scores.size()) {
    throw SchemaError("subgroup_auc: scores/labels must align with dataset rows");
  }
  FairnessRecord rec;
  for (const auto& key : groups) {
    const auto rows = subgroup_rows(data, key);
    SubgroupAuc s;
    s.key = key;
    s.support = rows.size();
    std::vector<double> sub_scores, sub_labels;
    sub_scores.reserve(rows.size());
    sub_labels.reserve(rows.size());
    for (Index r : rows) {
      sub_scores.push_back(scores[static_cast<std::size_t>(r)]);
      sub_labels.push_back(labels[static_cast<std::size_t>(r)]);
      (labels[static_cast<std::size_t>(r)] > 0.5 ? s.positives : s.negatives) += 1;
    }
    if (s.positives > 0 && s.negatives > 0) s.value = auc(sub_scores, sub_labels);
    s.qualifies = s.value && s.support >= rule.min_support && s.positives >= rule.min_class_count &&
                  s.negatives >= rule.min_class_count;
    rec.subgroups.push_back(std::move(s));
  }
  std::vector<double> included;
  for (const auto& s : rec.subgroups) {
    if (s.qualifies) included.push_back(*s.value);
  }
  if (included.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(included.begin(), included.end());
    rec.auc_gap = *hi - *lo;
  }
  return rec;
}

}  // namespace driftwin::learn
