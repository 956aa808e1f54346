#include "driftwin/io/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "driftwin/core/errors.hpp"

namespace driftwin::io {
namespace {

bool contains(const std::vector<std::string>& tokens, const std::string& v) {
  return std::find(tokens.begin(), tokens.end(), v) != tokens.end();
}

std::string where(const std::string& source, std::size_t line, const std::string& column) {
  return source + ": line " + std::to_string(line) + ", column '" + column + "'";
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& text, int& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Row {
  std::string unit;
  int period = 0;
  std::vector<double> cont;
  std::vector<double> bin;
  double label = 0.0;
};

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw SchemaError("csv: quote inside an unquoted field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw SchemaError("csv: unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

std::size_t IngestReport::rows_dropped() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : dropped) n += count;
  return n;
}

std::string IngestReport::summary() const {
  std::ostringstream out;
  out << "rows read " << rows_read << ", kept " << rows_kept << ", dropped " << rows_dropped();
  for (const auto& [reason, count] : dropped) out << "\n  dropped (" << reason << "): " << count;
  for (const auto& [unit, count] : rows_per_unit) {
    out << "\n  " << (unit.empty() ? std::string("rows") : "institution " + unit) << ": " << count;
  }
  return out.str();
}

IngestResult ingest_csv_text(std::string_view text, const IngestSchemaSpec& spec, const std::string& source) {
  spec.validate();
  const auto records = parse_csv(text);
  if (records.empty()) throw SchemaError(source + ": empty file");
  const auto& header = records.front();

  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!col.emplace(header[j], j).second) throw SchemaError(source + ": duplicate header column '" + header[j] + "'");
  }
  auto index_of = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw SchemaError(source + ": header lacks column '" + name + "'");
    return it->second;
  };
  const std::size_t period_col = index_of(spec.period_column);
  const std::size_t label_col = index_of(spec.label_column);
  std::optional<std::size_t> inst_col;
  if (spec.institution_column) inst_col = index_of(*spec.institution_column);
  std::vector<std::size_t> cont_cols, bin_cols;
  for (const auto& c : spec.continuous_columns) cont_cols.push_back(index_of(c));
  for (const auto& c : spec.binary_columns) bin_cols.push_back(index_of(c));
  for (const auto& c : spec.group_columns) bin_cols.push_back(index_of(c));
  const FeatureSchema schema = spec.feature_schema();

  IngestResult result;
  std::vector<Row> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t line = r + 1;
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    ++result.report.rows_read;
    if (rec.size() != header.size()) {
      throw SchemaError(source + ": line " + std::to_string(line) + " has " + std::to_string(rec.size()) +
                        " fields, header has " + std::to_string(header.size()));
    }
    std::string missing_in;
    auto is_missing = [&](std::size_t j) { return contains(spec.missing_tokens, rec[j]); };
    for (std::size_t j : {period_col, label_col}) {
      if (is_missing(j) && missing_in.empty()) missing_in = header[j];
    }
    if (inst_col && is_missing(*inst_col) && missing_in.empty()) missing_in = header[*inst_col];
    for (std::size_t j : cont_cols) {
      if (is_missing(j) && missing_in.empty()) missing_in = header[j];
    }
    for (std::size_t j : bin_cols) {
      if (is_missing(j) && missing_in.empty()) missing_in = header[j];
    }
    if (!missing_in.empty()) {
      if (spec.missing_policy == MissingPolicy::Error) {
        throw SchemaError(where(source, line, missing_in) + ": missing value");
      }
      ++result.report.dropped["missing value in " + missing_in];
      continue;
    }

    Row row;
    if (!parse_int(rec[period_col], row.period)) {
      throw SchemaError(where(source, line, header[period_col]) + ": period '" + rec[period_col] +
                        "' is not an integer");
    }
    if (inst_col) row.unit = rec[*inst_col];
    auto binary = [&](std::size_t j) {
      if (contains(spec.true_tokens, rec[j])) return 1.0;
      if (contains(spec.false_tokens, rec[j])) return 0.0;
      throw SchemaError(where(source, line, header[j]) + ": '" + rec[j] + "' is not a binary value");
    };
    row.label = binary(label_col);
    for (std::size_t j : cont_cols) {
      double v = 0.0;
      if (!parse_double(rec[j], v)) {
        throw SchemaError(where(source, line, header[j]) + ": '" + rec[j] + "' is not a finite number");
      }
      row.cont.push_back(v);
    }
    for (std::size_t j : bin_cols) row.bin.push_back(binary(j));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SchemaError(source + ": no usable data rows");
  result.report.rows_kept = rows.size();

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.unit != b.unit ? a.unit < b.unit : a.period < b.period;
  });
  const auto dc = static_cast<Index>(cont_cols.size());
  const auto db = static_cast<Index>(bin_cols.size());
  std::size_t begin = 0;
  while (begin < rows.size()) {
    const std::string unit = rows[begin].unit;
    std::vector<PeriodDataset> periods;
    std::size_t u_end = begin;
    while (u_end < rows.size() && rows[u_end].unit == unit) ++u_end;
    result.report.rows_per_unit[unit] = u_end - begin;
    for (std::size_t p = begin; p < u_end;) {
      std::size_t q = p;
      while (q < u_end && rows[q].period == rows[p].period) ++q;
      const auto n = static_cast<Index>(q - p);
      Eigen::MatrixXd cont(n, dc), bin(n, db);
      Eigen::VectorXd y(n);
      for (Index i = 0; i < n; ++i) {
        const Row& row = rows[p + static_cast<std::size_t>(i)];
        for (Index j = 0; j < dc; ++j) cont(i, j) = row.cont[static_cast<std::size_t>(j)];
        for (Index j = 0; j < db; ++j) bin(i, j) = row.bin[static_cast<std::size_t>(j)];
        y[i] = row.label;
      }
      periods.emplace_back(rows[p].period, schema, std::move(cont), std::move(bin), std::move(y));
      p = q;
    }
    result.units.push_back({unit, std::make_shared<const TemporalDataset>(std::move(periods))});
    begin = u_end;
  }
  return result;
}

IngestResult ingest_csv(const std::string& path, const IngestSchemaSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_csv_text(buf.str(), spec, path);
}

std::string write_ingested_csv(const IngestResult& data, const IngestSchemaSpec& spec) {
  std::ostringstream out;
  std::vector<std::string> header;
  if (spec.institution_column) header.push_back(*spec.institution_column);
  header.push_back(spec.period_column);
  header.push_back(spec.label_column);
  for (const auto& c : spec.continuous_columns) header.push_back(c);
  for (const auto& c : spec.binary_columns) header.push_back(c);
  for (const auto& c : spec.group_columns) header.push_back(c);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << quote(header[j]);
  out << "\n";
  const std::string t = spec.true_tokens.front();
  const std::string f = spec.false_tokens.front();
  for (const auto& unit : data.units) {
    for (const auto& p : unit.data->periods()) {
      for (Index i = 0; i < p.rows(); ++i) {
        if (spec.institution_column) out << quote(unit.id) << ",";
        out << p.period() << "," << (p.labels()[i] > 0.5 ? t : f);
        for (Index j = 0; j < p.cont().cols(); ++j) out << "," << format_number(p.cont()(i, j));
        for (Index j = 0; j < p.bin().cols(); ++j) out << "," << (p.bin()(i, j) > 0.5 ? t : f);
        out << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace driftwin::io
