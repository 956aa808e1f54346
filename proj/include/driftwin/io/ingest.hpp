#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "driftwin/exp/plan.hpp"
#include "driftwin/io/config.hpp"

namespace driftwin::io {

// RFC 4180 records: quoted fields, doubled quotes, CRLF or LF line ends,
// line breaks inside quotes. A trailing line break does not add a record.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> rows
  std::map<std::string, std::size_t> rows_per_unit;

  std::size_t rows_dropped() const;
  std::string summary() const;
};

struct IngestResult {
  std::vector<exp::DataSource::Unit> units;  // sorted by institution; one unnamed unit without an institution column
  IngestReport report;
};

// Rows are grouped by institution (when configured) and then by period.
// Errors name the offending line and column.
IngestResult ingest_csv_text(std::string_view text, const IngestSchemaSpec& spec, const std::string& source = "csv");
IngestResult ingest_csv(const std::string& path, const IngestSchemaSpec& spec);

// Writes the ingested rows back out with the spec's column names, one row per
// record, ordered by institution, period and original order.
std::string write_ingested_csv(const IngestResult& data, const IngestSchemaSpec& spec);

}  // namespace driftwin::io
