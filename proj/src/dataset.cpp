#include "driftwin/core/dataset.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "driftwin/core/errors.hpp"

namespace driftwin {

void FeatureSchema::validate() const {
  std::set<std::string> seen;
  for (const auto* list : {&continuous, &binary}) {
    for (const auto& name : *list) {
      if (name.empty()) throw SchemaError("feature schema: empty column name");
      if (!seen.insert(name).second) throw SchemaError("feature schema: duplicate column '" + name + "'");
    }
  }
  if (seen.empty()) throw SchemaError("feature schema: at least one feature required");
  std::set<std::string> group_seen;
  for (const auto& g : groups) {
    if (!binary_index(g)) throw SchemaError("feature schema: group '" + g + "' is not a binary column");
    if (!group_seen.insert(g).second) throw SchemaError("feature schema: duplicate group '" + g + "'");
  }
}

std::optional<std::size_t> FeatureSchema::binary_index(std::string_view name) const {
  auto it = std::find(binary.begin(), binary.end(), name);
  if (it == binary.end()) return std::nullopt;
  return static_cast<std::size_t>(it - binary.begin());
}

bool FeatureSchema::is_group(std::string_view name) const {
  return std::find(groups.begin(), groups.end(), name) != groups.end();
}

PeriodDataset::PeriodDataset(int period, FeatureSchema schema, Eigen::MatrixXd cont,
                             Eigen::MatrixXd bin, Eigen::VectorXd labels)
    : period_(period),
      schema_(std::move(schema)),
      cont_(std::move(cont)),
      bin_(std::move(bin)),
      labels_(std::move(labels)) {
  if (period_ < 1) throw RangeError("period index must be >= 1, got " + std::to_string(period_));
  schema_.validate();
  const Index n = labels_.size();
  if (cont_.rows() != n || bin_.rows() != n) {
    throw SchemaError("period " + std::to_string(period_) + ": row counts differ between blocks");
  }
  if (cont_.cols() != static_cast<Index>(schema_.continuous.size()) ||
      bin_.cols() != static_cast<Index>(schema_.binary.size())) {
    throw SchemaError("period " + std::to_string(period_) + ": column counts do not match schema");
  }
  auto is_bit = [](double v) { return v == 0.0 || v == 1.0; };
  if (!std::all_of(bin_.data(), bin_.data() + bin_.size(), is_bit)) {
    throw SchemaError("period " + std::to_string(period_) + ": binary block has non-{0,1} entries");
  }
  if (!std::all_of(labels_.data(), labels_.data() + labels_.size(), is_bit)) {
    throw SchemaError("period " + std::to_string(period_) + ": labels must be 0/1");
  }
}

Eigen::MatrixXd PeriodDataset::features() const {
  Eigen::MatrixXd x(rows(), cont_.cols() + bin_.cols());
  x << cont_, bin_;
  return x;
}

double PeriodDataset::positive_rate() const {
  return rows() == 0 ? 0.0 : labels_.mean();
}

PeriodDataset PeriodDataset::select_rows(std::span<const Index> rows) const {
  std::vector<Index> idx(rows.begin(), rows.end());
  for (Index r : idx) {
    if (r < 0 || r >= this->rows()) throw RangeError("row index out of range");
  }
  return PeriodDataset(period_, schema_, cont_(idx, Eigen::all),
                       bin_(idx, Eigen::all), labels_(idx));
}

PeriodDataset PeriodDataset::drop_binary(std::span<const std::string> names) const {
  FeatureSchema schema = schema_;
  std::vector<Index> keep;
  schema.binary.clear();
  for (std::size_t j = 0; j < schema_.binary.size(); ++j) {
    if (std::find(names.begin(), names.end(), schema_.binary[j]) != names.end()) continue;
    keep.push_back(static_cast<Index>(j));
    schema.binary.push_back(schema_.binary[j]);
  }
  std::erase_if(schema.groups, [&](const std::string& g) { return !schema.binary_index(g); });
  return PeriodDataset(period_, std::move(schema), cont_, bin_(Eigen::all, keep), labels_);
}

PeriodDataset PeriodDataset::with_period(int period) const {
  return PeriodDataset(period, schema_, cont_, bin_, labels_);
}

TemporalDataset::TemporalDataset(std::vector<PeriodDataset> periods) : periods_(std::move(periods)) {
  if (periods_.empty()) throw SchemaError("temporal dataset must contain at least one period");
  for (std::size_t i = 1; i < periods_.size(); ++i) {
    if (periods_[i].period() <= periods_[i - 1].period()) {
      throw SchemaError("temporal dataset: period indices must be strictly increasing");
    }
    if (!(periods_[i].schema() == periods_[0].schema())) {
      throw SchemaError("temporal dataset: schema differs at period " + std::to_string(periods_[i].period()));
    }
  }
}

bool TemporalDataset::contains(int period) const {
  return std::any_of(periods_.begin(), periods_.end(), [&](const auto& p) { return p.period() == period; });
}

const PeriodDataset& TemporalDataset::at(int period) const {
  for (const auto& p : periods_) {
    if (p.period() == period) return p;
  }
  throw RangeError("period " + std::to_string(period) + " not present");
}

std::vector<int> TemporalDataset::period_indices() const {
  std::vector<int> out;
  out.reserve(periods_.size());
  for (const auto& p : periods_) out.push_back(p.period());
  return out;
}

void SubgroupKey::validate(const FeatureSchema& schema) const {
  std::set<std::string> seen;
  for (const auto& [name, value] : assignments) {
    if (!schema.is_group(name)) throw SchemaError("subgroup key: unknown group '" + name + "'");
    if (value != 0 && value != 1) throw SchemaError("subgroup key: value for '" + name + "' must be 0 or 1");
    if (!seen.insert(name).second) throw SchemaError("subgroup key: group '" + name + "' repeated");
  }
}

std::string SubgroupKey::label() const {
  if (assignments.empty()) return "all";
  std::string out;
  for (const auto& [name, value] : assignments) {
    if (!out.empty()) out += '&';
    out += name + '=' + std::to_string(value);
  }
  return out;
}

SubgroupKey SubgroupKey::parse(std::string_view text) {
  SubgroupKey key;
  if (text.empty() || text == "all") return key;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t amp = std::min(text.find('&', pos), text.size());
    const std::string_view part = text.substr(pos, amp - pos);
    const std::size_t eq = part.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 2 != part.size() ||
        (part[eq + 1] != '0' && part[eq + 1] != '1')) {
      throw SchemaError("subgroup key: cannot parse '" + std::string(part) + "' (expected NAME=0|1)");
    }
    key.assignments.emplace_back(std::string(part.substr(0, eq)), part[eq + 1] - '0');
    pos = amp + 1;
  }
  return key;
}

PeriodDataset concat_windows(const TemporalDataset& data, int start, int end) {
  if (start > end) {
    throw RangeError("window [" + std::to_string(start) + ", " + std::to_string(end) + "] is inverted");
  }
  if (!data.contains(start) || !data.contains(end)) {
    throw RangeError("window [" + std::to_string(start) + ", " + std::to_string(end) +
                     "] references a missing period");
  }
  std::vector<const PeriodDataset*> members;
  Index n = 0;
  for (const auto& p : data.periods()) {
    if (p.period() >= start && p.period() <= end) {
      members.push_back(&p);
      n += p.rows();
    }
  }
  if (members.size() == 1) return *members.front();

  const auto& schema = data.schema();
  Eigen::MatrixXd cont(n, static_cast<Index>(schema.continuous.size()));
  Eigen::MatrixXd bin(n, static_cast<Index>(schema.binary.size()));
  Eigen::VectorXd y(n);
  Index offset = 0;
  for (const auto* p : members) {
    const Index m = p->rows();
    cont.middleRows(offset, m) = p->cont();
    bin.middleRows(offset, m) = p->bin();
    y.segment(offset, m) = p->labels();
    offset += m;
  }
  return PeriodDataset(end, schema, std::move(cont), std::move(bin), std::move(y));
}

std::vector<Index> subgroup_rows(const PeriodDataset& data, const SubgroupKey& key) {
  key.validate(data.schema());
  std::vector<std::pair<Index, double>> cols;
  for (const auto& [name, value] : key.assignments) {
    cols.emplace_back(static_cast<Index>(*data.schema().binary_index(name)), static_cast<double>(value));
  }
  std::vector<Index> rows;
  for (Index i = 0; i < data.rows(); ++i) {
    const bool match = std::all_of(cols.begin(), cols.end(),
                                   [&](const auto& c) { return data.bin()(i, c.first) == c.second; });
    if (match) rows.push_back(i);
  }
  return rows;
}

PeriodDataset filter_subgroup(const PeriodDataset& data, const SubgroupKey& key) {
  if (key.assignments.empty()) return data;
  const auto rows = subgroup_rows(data, key);
  return data.select_rows(rows);
}

std::pair<PeriodDataset, PeriodDataset> split_rows_deterministic(const PeriodDataset& data,
                                                                  double fraction, RngStream rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw RangeError("split fraction must lie strictly between 0 and 1");
  }
  const Index n = data.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  std::vector<Index> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<Index> second(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {data.select_rows(first), data.select_rows(second)};
}

}  // namespace driftwin
