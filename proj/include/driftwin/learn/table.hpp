#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace driftwin::learn {

// Column-oriented analysis table: numeric columns plus string-valued label
// columns (used for fixed-effect identifiers). Column order is insertion order.
class DataTable {
 public:
  void add_numeric(const std::string& name, std::vector<double> values);
  void add_label(const std::string& name, std::vector<std::string> values);

  std::size_t rows() const { return rows_; }
  bool has_numeric(const std::string& name) const { return numeric_.count(name) > 0; }
  bool has_label(const std::string& name) const { return labels_.count(name) > 0; }
  const std::vector<double>& numeric(const std::string& name) const;
  const std::vector<std::string>& label(const std::string& name) const;
  const std::vector<std::string>& column_order() const { return order_; }

  DataTable select_rows(std::span<const std::size_t> rows) const;

 private:
  void check_rows(const std::string& name, std::size_t n);

  std::size_t rows_ = 0;
  bool empty_ = true;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<double>> numeric_;
  std::map<std::string, std::vector<std::string>> labels_;
};

}  // namespace driftwin::learn
