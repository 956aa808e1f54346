#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "driftwin/core/dataset.hpp"

namespace driftwin::learn {

// Mann-Whitney AUC with ties counted as one half: the fraction of
// (positive, negative) pairs ranked correctly. O(n log n) via midranks.
// Throws DegenerateFitError unless both classes are present.
double auc(std::span<const double> scores, std::span<const double> labels);

struct SubgroupAuc {
  SubgroupKey key;
  std::size_t support = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::optional<double> value;  // absent when a class is missing
  bool qualifies = false;       // meets the minimum-support rule
};

// Max-min spread of subgroup shift: delta for covariate, theta for concept.
struct GroupShiftGaps {
  double delta = 0.0;
  double theta = 0.0;
};

struct FairnessRecord {
  std::vector<SubgroupAuc> subgroups;
  std::optional<double> auc_gap;  // absent when fewer than two subgroups qualify
  std::optional<GroupShiftGaps> shift_gaps;

  std::optional<double> auc_of(const SubgroupKey& key) const;
};

struct SupportRule {
  std::size_t min_support = 50;
  std::size_t min_class_count = 10;
};

// Per-subgroup AUC over the rows of `data` (scores and labels aligned with its
// rows). The gap spans only subgroups meeting the support rule.
FairnessRecord subgroup_auc(std::span<const double> scores, std::span<const double> labels,
                            const PeriodDataset& data, std::span<const SubgroupKey> groups,
                            const SupportRule& rule = {});

}  // namespace driftwin::learn
