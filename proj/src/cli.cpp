#include "driftwin/io/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "driftwin/core/errors.hpp"
#include "driftwin/exp/runner.hpp"
#include "driftwin/io/config.hpp"
#include "driftwin/io/ingest.hpp"
#include "driftwin/io/outputs.hpp"

namespace driftwin::io {
namespace {

using nlohmann::json;

// Raised for problems the user fixes by changing flags or config files.
struct UsageError : Error {
  using Error::Error;
};

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string groups;
  std::optional<int> test_period;
  std::optional<int> min_support;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--groups", f.groups, "comma-separated subgroups, e.g. G1=0,G1=1 or G1=1&G2=0");
  cmd->add_option("--test-period", f.test_period, "fixed test period (default: last period)");
  cmd->add_option("--min-support", f.min_support, "minimum subgroup size for the AUC gap");
}

json load_doc(const CommonFlags& f) {
  json doc = json::object();
  if (!f.config.empty()) {
    if (!std::filesystem::exists(f.config)) throw UsageError(f.config + ": config file not found");
    try {
      doc = read_json_file(f.config);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (!doc.is_object()) throw UsageError(f.config + ": top level must be an object");
  }
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.groups.empty()) {
    json list = json::array();
    std::string item;
    for (char c : f.groups + ",") {
      if (c == ',') {
        if (!item.empty()) list.push_back(item);
        item.clear();
      } else {
        item += c;
      }
    }
    doc["evaluation"]["groups"] = list;
  }
  if (f.test_period) doc["evaluation"]["test_period"] = *f.test_period;
  if (f.min_support) doc["evaluation"]["min_support"] = *f.min_support;
  return doc;
}

RunConfig parse_doc(const json& doc, const CommonFlags& f) {
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw UsageError(f.config.empty() ? e.what() : f.config + ": " + e.what());
  }
}

json run_info(const std::string& command, std::uint64_t seed) {
  return json{{"tool", "driftwin"}, {"command", command}, {"seed", seed}};
}

void finish(const std::vector<exp::ExperimentOutput>& outputs, const json& manifest, const std::string& out) {
  const auto files = emit_outputs(outputs, manifest, out);
  std::cout << fits_text(outputs);
  std::cout << "wrote " << files.size() << " files to " << out << "\n";
}

int cmd_simulate(const CommonFlags& f, const std::string& scenario) {
  json doc = load_doc(f);
  if (!scenario.empty()) {
    if (doc.contains("scenario") && doc["scenario"].is_object()) {
      doc["scenario"]["tag"] = scenario;
    } else {
      doc["scenario"] = scenario;
    }
  }
  RunConfig cfg = parse_doc(doc, f);
  if (!cfg.scenario) throw UsageError("simulate: no scenario given (use --scenario or a config with scenario.tag)");
  const auto output = exp::run_experiment(cfg.plan, exp::DataSource::simulated(*cfg.scenario));
  finish({output}, manifest_json({output}, {config_to_json(cfg)}, run_info("simulate", cfg.seed)), f.out);
  return 0;
}

int cmd_ingest(const CommonFlags& f, const std::string& csv, const std::string& schema) {
  json doc = load_doc(f);
  if (!schema.empty()) {
    json s;
    try {
      s = read_json_file(schema);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (!s.is_object()) throw UsageError(schema + ": top level must be an object");
    if (doc.contains("ingest") && doc["ingest"].contains("csv") && !s.contains("csv")) s["csv"] = doc["ingest"]["csv"];
    doc["ingest"] = s;
  }
  if (!csv.empty()) doc["ingest"]["csv"] = csv;
  if (!doc.contains("ingest")) throw UsageError("ingest-run: no ingest schema (use --schema or a config ingest section)");
  RunConfig cfg = parse_doc(doc, f);
  if (!cfg.csv_path) throw UsageError("ingest-run: no input CSV (use --csv)");

  IngestResult data = ingest_csv(*cfg.csv_path, *cfg.ingest);
  std::cerr << data.report.summary() << "\n";
  const auto output = exp::run_experiment(cfg.plan, exp::DataSource::empirical(data.units));
  json extra = run_info("ingest-run", cfg.seed);
  extra["ingest"] = {{"rows_read", data.report.rows_read},
                     {"rows_kept", data.report.rows_kept},
                     {"dropped", data.report.dropped},
                     {"rows_per_unit", data.report.rows_per_unit}};
  finish({output}, manifest_json({output}, {config_to_json(cfg)}, extra), f.out);
  return 0;
}

int cmd_battery(const CommonFlags& f) {
  const json doc = load_doc(f);
  if (doc.contains("scenario") && !doc["scenario"].is_object()) {
    throw UsageError("battery: scenario must be an object of default-drawing settings");
  }
  if (doc.contains("scenario") && doc["scenario"].contains("tag")) {
    throw UsageError("battery: runs every scenario; remove scenario.tag");
  }
  if (doc.contains("evaluation") && doc["evaluation"].contains("groups")) {
    throw UsageError("battery: subgroups are fixed per scenario; remove evaluation.groups");
  }
  RunConfig base = parse_doc(doc, f);
  if (base.empirical()) throw UsageError("battery: ingest settings are not used by the battery");

  exp::BatteryOptions opts;
  opts.seed = base.seed;
  opts.defaults = base.defaults;
  opts.base_plan = base.plan;
  std::vector<exp::ExperimentOutput> outputs;
  std::vector<json> configs;
  for (const auto& [plan, scenario] : exp::battery_plans(opts)) {
    std::cerr << "running " << plan.name << "\n";
    outputs.push_back(exp::run_experiment(plan, exp::DataSource::simulated(scenario)));
    RunConfig echo = base;
    echo.name = plan.name;
    echo.plan = plan;
    echo.scenario = scenario;
    for (const auto& g : scenario.group_shifts) {
      if (scenario.tag == sim::Scenario::E) echo.defaults.single_group_kind = g.kind;
      if (scenario.tag == sim::Scenario::F && g.direction < 0) echo.defaults.opposed = true;
    }
    configs.push_back(config_to_json(echo));
  }
  finish(outputs, manifest_json(outputs, configs, run_info("battery", base.seed)), f.out);
  return 0;
}

int cmd_report(const std::string& csv, std::string out) {
  namespace fs = std::filesystem;
  if (!fs::exists(csv)) throw UsageError(csv + ": results file not found");
  if (out.empty()) out = fs::path(csv).parent_path().string();
  if (out.empty()) out = ".";

  std::map<std::string, exp::ExperimentPlan> plans;
  const fs::path manifest = fs::path(csv).parent_path() / "manifest.json";
  if (fs::exists(manifest)) {
    const json m = read_json_file(manifest.string());
    for (const auto& e : m.value("experiments", json::array())) {
      if (!e.contains("config")) continue;
      plans[e.at("name").get<std::string>()] = parse_config(e.at("config")).plan;
    }
  }
  auto outputs = read_results_csv(read_text_file(csv), plans, exp::ExperimentPlan{});
  for (auto& o : outputs) {
    if (!plans.count(o.name)) {
      // Without a manifest, use the oracle measure only if every window has it.
      const bool oracle = std::all_of(o.results.begin(), o.results.end(),
                                      [](const auto& r) { return r.shift.concept_oracle.has_value(); });
      o.plan.concept_measure = oracle ? exp::ConceptMeasure::Oracle : exp::ConceptMeasure::Resid;
      o.plan.analyses.fairness_regression = !o.plan.groups.empty();
    }
    o = exp::fit_analyses(std::move(o));
  }
  fs::create_directories(out);
  std::size_t n = 0;
  write_text_file((fs::path(out) / "fits.json").string(), fits_json(outputs).dump(2) + "\n");
  write_text_file((fs::path(out) / "fits.txt").string(), fits_text(outputs));
  n += 2;
  for (const auto& o : outputs) {
    for (const auto& [name, svg] : render_charts(o)) {
      write_text_file((fs::path(out) / name).string(), svg);
      ++n;
    }
  }
  std::cout << fits_text(outputs);
  std::cout << "wrote " << n << " files to " << out << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Expanding-window evaluation of model performance and fairness under distribution shift"};
  app.require_subcommand(1);

  CommonFlags sim_flags, ingest_flags, battery_flags;
  std::string scenario, csv, schema, report_csv, report_out;

  auto* simulate = app.add_subcommand("simulate", "run one simulated scenario");
  add_common(simulate, sim_flags);
  simulate->add_option("--scenario", scenario, "scenario tag A-F");

  auto* ingest = app.add_subcommand("ingest-run", "run expanding windows on an input CSV");
  add_common(ingest, ingest_flags);
  ingest->add_option("--csv", csv, "input CSV");
  ingest->add_option("--schema", schema, "JSON column schema for the CSV");

  auto* battery = app.add_subcommand("battery", "run scenarios A-F with their regressions");
  add_common(battery, battery_flags);

  auto* report = app.add_subcommand("report", "refit regressions and redraw charts from results.csv");
  report->add_option("--csv", report_csv, "results.csv to read")->required();
  report->add_option("--out", report_out, "output directory (default: next to the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags, scenario);
    if (ingest->parsed()) return cmd_ingest(ingest_flags, csv, schema);
    if (battery->parsed()) return cmd_battery(battery_flags);
    if (report->parsed()) return cmd_report(report_csv, report_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace driftwin::io
