#include "driftwin/learn/table.hpp"

#include "driftwin/core/errors.hpp"

namespace driftwin::learn {

void DataTable::check_rows(const std::string& name, std::size_t n) {
  if (numeric_.count(name) || labels_.count(name)) throw SchemaError("table: duplicate column '" + name + "'");
  if (empty_) {
    rows_ = n;
    empty_ = false;
  } else if (n != rows_) {
    throw SchemaError("table: column '" + name + "' has " + std::to_string(n) + " rows, expected " +
                      std::to_string(rows_));
  }
  order_.push_back(name);
}

void DataTable::add_numeric(const std::string& name, std::vector<double> values) {
  check_rows(name, values.size());
  numeric_.emplace(name, std::move(values));
}

void DataTable::add_label(const std::string& name, std::vector<std::string> values) {
  check_rows(name, values.size());
  labels_.emplace(name, std::move(values));
}

const std::vector<double>& DataTable::numeric(const std::string& name) const {
  auto it = numeric_.find(name);
  if (it == numeric_.end()) throw SchemaError("table: no numeric column '" + name + "'");
  return it->second;
}

const std::vector<std::string>& DataTable::label(const std::string& name) const {
  auto it = labels_.find(name);
  if (it == labels_.end()) throw SchemaError("table: no label column '" + name + "'");
  return it->second;
}

DataTable DataTable::select_rows(std::span<const std::size_t> rows) const {
  DataTable out;
  for (const auto& name : order_) {
    if (auto it = numeric_.find(name); it != numeric_.end()) {
      std::vector<double> v;
      v.reserve(rows.size());
      for (auto r : rows) v.push_back(it->second.at(r));
      out.add_numeric(name, std::move(v));
    } else {
      const auto& src = labels_.at(name);
      std::vector<std::string> v;
      v.reserve(rows.size());
      for (auto r : rows) v.push_back(src.at(r));
      out.add_label(name, std::move(v));
    }
  }
  return out;
}

}  // namespace driftwin::learn
