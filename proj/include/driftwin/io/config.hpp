#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftwin/exp/plan.hpp"
#include "driftwin/sim/scenario.hpp"

namespace driftwin::io {

enum class MissingPolicy { DropRow, Error };

// Column roles of an input CSV for empirical runs.
struct IngestSchemaSpec {
  std::string period_column;
  std::string label_column;
  std::vector<std::string> continuous_columns;
  std::vector<std::string> binary_columns;
  std::vector<std::string> group_columns;  // binary columns defining subgroups
  std::optional<std::string> institution_column;
  MissingPolicy missing_policy = MissingPolicy::DropRow;
  std::vector<std::string> true_tokens{"1"};
  std::vector<std::string> false_tokens{"0"};
  std::vector<std::string> missing_tokens{"", "NA"};

  // Throws ConfigError on a repeated or missing column role.
  void validate() const;
  FeatureSchema feature_schema() const;
};

// Everything a simulate / ingest-run / battery invocation needs, with all
// defaults resolved.
struct RunConfig {
  std::string name;
  std::uint64_t seed = 7;
  sim::ScenarioDefaults defaults;
  std::optional<sim::ShiftScenarioConfig> scenario;  // simulation
  std::optional<IngestSchemaSpec> ingest;           // empirical
  std::optional<std::string> csv_path;
  exp::ExperimentPlan plan;

  bool empirical() const { return ingest.has_value(); }
};

// Parses the JSON config format (see docs/config.md). Unknown keys and
// invalid values throw ConfigError naming the field path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Fully explicit form: every drawn parameter and default is written, so
// parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const RunConfig& config);

IngestSchemaSpec parse_ingest_schema(const nlohmann::json& doc, const std::string& path = "ingest");
nlohmann::json ingest_schema_to_json(const IngestSchemaSpec& spec);

nlohmann::json read_json_file(const std::string& path);

}  // namespace driftwin::io
