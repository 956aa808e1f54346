#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftwin/core/rng.hpp"

namespace driftwin {

using Index = Eigen::Index;

// Partition of the feature columns. Group attributes are binary columns that
// define evaluation subgroups; they live inside `binary` as well.
struct FeatureSchema {
  std::vector<std::string> continuous;
  std::vector<std::string> binary;
  std::vector<std::string> groups;

  void validate() const;
  std::size_t dim() const { return continuous.size() + binary.size(); }
  std::optional<std::size_t> binary_index(std::string_view name) const;
  bool is_group(std::string_view name) const;

  bool operator==(const FeatureSchema&) const = default;
};

// One period t of tabular data: continuous block, binary block, labels.
// Immutable after construction.
class PeriodDataset {
 public:
  PeriodDataset(int period, FeatureSchema schema, Eigen::MatrixXd cont, Eigen::MatrixXd bin,
                Eigen::VectorXd labels);

  int period() const { return period_; }
  Index rows() const { return labels_.size(); }
  const FeatureSchema& schema() const { return schema_; }
  const Eigen::MatrixXd& cont() const { return cont_; }
  const Eigen::MatrixXd& bin() const { return bin_; }
  const Eigen::VectorXd& labels() const { return labels_; }

  // [cont | bin] without an intercept column.
  Eigen::MatrixXd features() const;
  double positive_rate() const;

  PeriodDataset select_rows(std::span<const Index> rows) const;
  // Same rows, with the named binary columns removed from the schema and block.
  PeriodDataset drop_binary(std::span<const std::string> names) const;
  PeriodDataset with_period(int period) const;

 private:
  int period_;
  FeatureSchema schema_;
  Eigen::MatrixXd cont_;
  Eigen::MatrixXd bin_;
  Eigen::VectorXd labels_;
};

// Periods in strictly increasing order sharing one schema.
class TemporalDataset {
 public:
  explicit TemporalDataset(std::vector<PeriodDataset> periods);

  const std::vector<PeriodDataset>& periods() const { return periods_; }
  const FeatureSchema& schema() const { return periods_.front().schema(); }
  std::size_t size() const { return periods_.size(); }
  int first_period() const { return periods_.front().period(); }
  int last_period() const { return periods_.back().period(); }
  bool contains(int period) const;
  const PeriodDataset& at(int period) const;
  std::vector<int> period_indices() const;

 private:
  std::vector<PeriodDataset> periods_;
};

// Conjunction of (group, value) assignments. Empty key selects every row.
struct SubgroupKey {
  std::vector<std::pair<std::string, int>> assignments;

  void validate(const FeatureSchema& schema) const;
  // "G1=1&G2=0"; the empty key renders as "all".
  std::string label() const;
  static SubgroupKey parse(std::string_view text);

  bool operator==(const SubgroupKey&) const = default;
  auto operator<=>(const SubgroupKey&) const = default;
};

// Row-wise concatenation of all periods in [start, end]; the result carries
// period index `end`.
PeriodDataset concat_windows(const TemporalDataset& data, int start, int end);

PeriodDataset filter_subgroup(const PeriodDataset& data, const SubgroupKey& key);
std::vector<Index> subgroup_rows(const PeriodDataset& data, const SubgroupKey& key);

// Shuffled split into floor(fraction * n) and the remainder.
std::pair<PeriodDataset, PeriodDataset> split_rows_deterministic(const PeriodDataset& data,
                                                                  double fraction, RngStream rng);

}  // namespace driftwin
