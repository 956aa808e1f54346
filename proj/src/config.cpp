#include "driftwin/io/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "driftwin/core/errors.hpp"
#include "driftwin/exp/runner.hpp"

namespace driftwin::io {
namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path, std::vector<std::string>& unknown)
      : j_(j), path_(std::move(path)), unknown_(unknown) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;
  ~Section() {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) unknown_.push_back(field(key));
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::optional<double> number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ConfigError(field(key) + ": expected a number");
    return v->get<double>();
  }

  std::optional<long long> integer(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
    return v->get<long long>();
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned()) throw ConfigError(field(key) + ": expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw ConfigError(field(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(field(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(field(key) + ": expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a string");
      out.push_back((*v)[i].get<std::string>());
    }
    return out;
  }

  std::optional<Eigen::VectorXd> vector(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(field(key) + ": expected a list of numbers");
    Eigen::VectorXd out(static_cast<Index>(v->size()));
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a number");
      out[static_cast<Index>(i)] = (*v)[i].get<double>();
    }
    return out;
  }

  std::optional<std::vector<int>> integers(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(field(key) + ": expected a list of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_integer()) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected an integer");
      }
      out.push_back((*v)[i].get<int>());
    }
    return out;
  }

  std::vector<std::string>& unknown() { return unknown_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

template <class T>
void assign(std::optional<T> v, T& target) {
  if (v) target = *v;
}

void assign_int(std::optional<long long> v, int& target) {
  if (v) target = static_cast<int>(*v);
}

std::pair<double, double> pair_of(const Eigen::VectorXd& v, const std::string& field) {
  if (v.size() != 2) throw ConfigError(field + ": expected [lo, hi]");
  return {v[0], v[1]};
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void check_probabilities(const Eigen::VectorXd& v, const std::string& field) {
  for (Index j = 0; j < v.size(); ++j) {
    if (!(v[j] >= 0.0 && v[j] <= 1.0)) {
      throw ConfigError(field + "[" + std::to_string(j) + "]: must lie in [0, 1], got " + std::to_string(v[j]));
    }
  }
}

sim::Progression parse_progression(const std::string& text, const std::string& field) {
  if (text == "linear") return sim::Progression::Linear;
  if (text == "constant_zero") return sim::Progression::ConstantZero;
  throw ConfigError(field + ": expected linear or constant_zero, got '" + text + "'");
}

std::string progression_name(sim::Progression p) {
  return p == sim::Progression::Linear ? "linear" : "constant_zero";
}

template <class F>
auto rethrow_with(const std::string& path, F&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void parse_defaults(Section& s, sim::ScenarioDefaults& d) {
  assign_int(s.integer("periods"), d.periods);
  assign_int(s.integer("n_per_period"), d.n_per_period);
  assign_int(s.integer("n_continuous"), d.n_continuous);
  assign_int(s.integer("n_binary"), d.n_binary);
  assign(s.number("drift_magnitude"), d.drift_magnitude);
  assign(s.number("rho_range"), d.rho_range);
  assign(s.number("beta_range"), d.beta_range);
  if (auto r = s.vector("pi0_range")) {
    std::tie(d.pi0_lo, d.pi0_hi) = pair_of(*r, s.field("pi0_range"));
    if (!(0.0 < d.pi0_lo && d.pi0_lo <= d.pi0_hi && d.pi0_hi < 1.0)) {
      throw ConfigError(s.field("pi0_range") + ": need 0 < lo <= hi < 1");
    }
  }
  if (auto g = s.number("group_probability")) {
    if (!(*g > 0.0 && *g < 1.0)) throw ConfigError(s.field("group_probability") + ": must lie in (0, 1)");
    d.group_probability = *g;
  }
  if (auto k = s.string("group_shift_kind")) {
    d.single_group_kind = rethrow_with(s.field("group_shift_kind"), [&] { return sim::parse_shift_kind(*k); });
  }
  assign(s.boolean("opposed"), d.opposed);
  if (d.periods < 2) throw ConfigError(s.field("periods") + ": must be at least 2");
  if (d.n_per_period < 1) throw ConfigError(s.field("n_per_period") + ": must be at least 1");
  if (d.n_continuous < 0 || d.n_binary < 0) throw ConfigError(s.field("n_continuous") + ": negative feature count");
}

json defaults_to_json(const sim::ScenarioDefaults& d) {
  return json{{"periods", d.periods},
              {"n_per_period", d.n_per_period},
              {"n_continuous", d.n_continuous},
              {"n_binary", d.n_binary},
              {"drift_magnitude", d.drift_magnitude},
              {"rho_range", d.rho_range},
              {"beta_range", d.beta_range},
              {"pi0_range", {d.pi0_lo, d.pi0_hi}},
              {"group_probability", d.group_probability},
              {"group_shift_kind", std::string(sim::to_string(d.single_group_kind))},
              {"opposed", d.opposed}};
}

sim::ShiftScenarioConfig parse_scenario_overrides(Section& s, sim::ShiftScenarioConfig cfg) {
  if (auto v = s.vector("mu0")) cfg.mu0 = *v;
  if (auto v = s.vector("pi0")) {
    check_probabilities(*v, s.field("pi0"));
    cfg.pi0 = *v;
  }
  if (auto v = s.vector("delta")) cfg.drift.delta_cont = *v;
  if (auto v = s.vector("rho")) cfg.drift.rho_bin = *v;
  if (auto p = s.string("progression")) cfg.drift.progression = parse_progression(*p, s.field("progression"));
  if (auto v = s.vector("beta_start")) cfg.beta.beta_start = *v;
  if (auto v = s.vector("beta_end")) cfg.beta.beta_end = *v;
  if (auto v = s.vector("clip")) std::tie(cfg.clip_lo, cfg.clip_hi) = pair_of(*v, s.field("clip"));
  if (const json* gs = s.find("group_shifts")) {
    if (!gs->is_array()) throw ConfigError(s.field("group_shifts") + ": expected a list");
    cfg.group_shifts.clear();
    for (std::size_t i = 0; i < gs->size(); ++i) {
      Section g((*gs)[i], s.field("group_shifts") + "[" + std::to_string(i) + "]", s.unknown());
      sim::GroupShiftSpec spec;
      auto name = g.string("group");
      if (!name) throw ConfigError(g.field("group") + ": required");
      spec.group = *name;
      assign_int(g.integer("shifted_value"), spec.shifted_value);
      if (auto k = g.string("kind")) spec.kind = rethrow_with(g.field("kind"), [&] { return sim::parse_shift_kind(*k); });
      assign_int(g.integer("direction"), spec.direction);
      cfg.group_shifts.push_back(spec);
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("scenario.") + e.what());
  }
  return cfg;
}

json scenario_to_json(const sim::ShiftScenarioConfig& c, const sim::ScenarioDefaults& d) {
  json j = defaults_to_json(d);
  j["tag"] = std::string(sim::to_string(c.tag));
  j["mu0"] = to_json(c.mu0);
  j["pi0"] = to_json(c.pi0);
  j["delta"] = to_json(c.drift.delta_cont);
  j["rho"] = to_json(c.drift.rho_bin);
  j["progression"] = progression_name(c.drift.progression);
  j["beta_start"] = to_json(c.beta.beta_start);
  j["beta_end"] = to_json(c.beta.beta_end);
  j["clip"] = {c.clip_lo, c.clip_hi};
  j["group_shifts"] = json::array();
  for (const auto& g : c.group_shifts) {
    j["group_shifts"].push_back({{"group", g.group},
                                 {"shifted_value", g.shifted_value},
                                 {"kind", std::string(sim::to_string(g.kind))},
                                 {"direction", g.direction}});
  }
  return j;
}

void parse_learner(Section& s, learn::LogisticOptions& o) {
  assign(s.number("l2"), o.l2);
  assign(s.number("tol"), o.tol);
  assign_int(s.integer("max_iter"), o.max_iter);
}

void parse_metrics(Section& s, exp::ExperimentPlan& plan) {
  auto& m = plan.shift;
  assign(s.number("pca_variance"), m.pca_variance);
  if (auto k = s.integer("k")) m.k = static_cast<int>(*k);
  assign(s.boolean("knn"), m.knn);
  if (auto mode = s.string("js_mode")) {
    m.js_mode = rethrow_with(s.field("js_mode"), [&] { return metrics::parse_knn_js_mode(*mode); });
  }
  if (auto r = s.string("residualize")) {
    if (*r != "pooled" && *r != "per_unit") {
      throw ConfigError(s.field("residualize") + ": expected pooled or per_unit, got '" + *r + "'");
    }
    plan.residualize_per_unit = *r == "per_unit";
  }
  if (const json* f = s.find("forest")) {
    Section fs(*f, s.field("forest"), s.unknown());
    assign_int(fs.integer("trees"), plan.forest.trees);
    assign_int(fs.integer("min_leaf"), plan.forest.min_leaf);
    assign_int(fs.integer("max_depth"), plan.forest.max_depth);
    assign(fs.boolean("bootstrap"), plan.forest.bootstrap);
  }
}

std::vector<SubgroupKey> parse_groups(const std::vector<std::string>& labels, const std::string& field) {
  std::vector<SubgroupKey> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    try {
      out.push_back(SubgroupKey::parse(labels[i]));
    } catch (const Error& e) {
      throw ConfigError(field + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

void parse_evaluation(Section& s, exp::ExperimentPlan& plan, std::optional<bool>& fairness_set,
                      std::optional<exp::ConceptMeasure>& measure_set, bool& groups_set) {
  if (auto v = s.integer("test_period")) plan.test_period = static_cast<int>(*v);
  if (auto v = s.integer("train_end")) plan.train_end = static_cast<int>(*v);
  if (auto v = s.integers("window_starts")) plan.window_starts = *v;
  if (auto g = s.strings("groups")) {
    plan.groups = parse_groups(*g, s.field("groups"));
    groups_set = true;
  }
  assign(s.boolean("include_group_features"), plan.include_group_features);
  assign(s.boolean("per_group_shift"), plan.per_group_shift);
  if (auto b = s.string("subgroup_basis")) {
    plan.subgroup_basis = rethrow_with(s.field("subgroup_basis"), [&] { return exp::parse_subgroup_basis(*b); });
  }
  if (auto m = s.string("concept_measure")) {
    measure_set = rethrow_with(s.field("concept_measure"), [&] { return exp::parse_concept_measure(*m); });
  }
  if (auto v = s.integer("min_support")) {
    if (*v < 1) throw ConfigError(s.field("min_support") + ": must be positive");
    plan.support.min_support = static_cast<std::size_t>(*v);
  }
  if (auto v = s.integer("min_class_count")) {
    if (*v < 1) throw ConfigError(s.field("min_class_count") + ": must be positive");
    plan.support.min_class_count = static_cast<std::size_t>(*v);
  }
  if (auto v = s.integer("threads")) {
    if (*v < 0) throw ConfigError(s.field("threads") + ": must be non-negative");
    plan.threads = static_cast<unsigned>(*v);
  }
  if (const json* a = s.find("analyses")) {
    Section as(*a, s.field("analyses"), s.unknown());
    assign(as.boolean("performance_regression"), plan.analyses.performance_regression);
    fairness_set = as.boolean("fairness_regression");
    assign(as.boolean("tertile_analysis"), plan.analyses.tertile_analysis);
  }
}

json plan_to_json(const exp::ExperimentPlan& p) {
  json eval;
  if (p.test_period) eval["test_period"] = *p.test_period;
  if (p.train_end) eval["train_end"] = *p.train_end;
  eval["window_starts"] = p.window_starts;
  json groups = json::array();
  for (const auto& g : p.groups) groups.push_back(g.label());
  eval["groups"] = groups;
  eval["include_group_features"] = p.include_group_features;
  eval["per_group_shift"] = p.per_group_shift;
  eval["subgroup_basis"] = std::string(exp::to_string(p.subgroup_basis));
  eval["concept_measure"] = std::string(exp::to_string(p.concept_measure));
  eval["min_support"] = p.support.min_support;
  eval["min_class_count"] = p.support.min_class_count;
  eval["threads"] = p.threads;
  eval["analyses"] = {{"performance_regression", p.analyses.performance_regression},
                      {"fairness_regression", p.analyses.fairness_regression},
                      {"tertile_analysis", p.analyses.tertile_analysis}};
  return eval;
}

}  // namespace

void IngestSchemaSpec::validate() const {
  if (period_column.empty()) throw ConfigError("ingest.period_column: required");
  if (label_column.empty()) throw ConfigError("ingest.label_column: required");
  std::set<std::string> seen;
  auto claim = [&](const std::string& col, const std::string& role) {
    if (col.empty()) throw ConfigError("ingest." + role + ": empty column name");
    if (!seen.insert(col).second) throw ConfigError("ingest." + role + ": column '" + col + "' listed twice");
  };
  claim(period_column, "period_column");
  claim(label_column, "label_column");
  if (institution_column) claim(*institution_column, "institution_column");
  for (const auto& c : continuous_columns) claim(c, "continuous_columns");
  for (const auto& c : binary_columns) claim(c, "binary_columns");
  for (const auto& c : group_columns) claim(c, "group_columns");
  if (continuous_columns.empty() && binary_columns.empty() && group_columns.empty()) {
    throw ConfigError("ingest: no feature columns");
  }
  for (const auto& t : true_tokens) {
    for (const auto& f : false_tokens) {
      if (t == f) throw ConfigError("ingest.true_tokens: '" + t + "' is also a false token");
    }
  }
  if (true_tokens.empty() || false_tokens.empty()) throw ConfigError("ingest.true_tokens: token lists must be non-empty");
}

FeatureSchema IngestSchemaSpec::feature_schema() const {
  FeatureSchema s;
  s.continuous = continuous_columns;
  s.binary = binary_columns;
  s.binary.insert(s.binary.end(), group_columns.begin(), group_columns.end());
  s.groups = group_columns;
  return s;
}

IngestSchemaSpec parse_ingest_schema(const nlohmann::json& doc, const std::string& path) {
  std::vector<std::string> unknown;
  IngestSchemaSpec spec;
  {
    Section s(doc, path, unknown);
    assign(s.string("period_column"), spec.period_column);
    assign(s.string("label_column"), spec.label_column);
    assign(s.strings("continuous_columns"), spec.continuous_columns);
    assign(s.strings("binary_columns"), spec.binary_columns);
    assign(s.strings("group_columns"), spec.group_columns);
    if (auto c = s.string("institution_column")) spec.institution_column = *c;
    if (auto m = s.string("missing_policy")) {
      if (*m == "drop_row") {
        spec.missing_policy = MissingPolicy::DropRow;
      } else if (*m == "error") {
        spec.missing_policy = MissingPolicy::Error;
      } else {
        throw ConfigError(s.field("missing_policy") + ": expected drop_row or error, got '" + *m + "'");
      }
    }
    assign(s.strings("true_tokens"), spec.true_tokens);
    assign(s.strings("false_tokens"), spec.false_tokens);
    assign(s.strings("missing_tokens"), spec.missing_tokens);
    // Lets a schema file sit inside a full config's ingest section.
    s.find("csv");
  }
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }
  spec.validate();
  return spec;
}

nlohmann::json ingest_schema_to_json(const IngestSchemaSpec& spec) {
  json j{{"period_column", spec.period_column},
         {"label_column", spec.label_column},
         {"continuous_columns", spec.continuous_columns},
         {"binary_columns", spec.binary_columns},
         {"group_columns", spec.group_columns},
         {"missing_policy", spec.missing_policy == MissingPolicy::DropRow ? "drop_row" : "error"},
         {"true_tokens", spec.true_tokens},
         {"false_tokens", spec.false_tokens},
         {"missing_tokens", spec.missing_tokens}};
  if (spec.institution_column) j["institution_column"] = *spec.institution_column;
  return j;
}

RunConfig parse_config(const nlohmann::json& doc) {
  RunConfig cfg;
  std::vector<std::string> unknown;
  std::optional<bool> fairness_set;
  std::optional<exp::ConceptMeasure> measure_set;
  bool groups_set = false;
  {
    Section root(doc, "", unknown);
    assign(root.string("name"), cfg.name);
    if (auto seed = root.unsigned_integer("seed")) cfg.seed = *seed;

    if (const json* ing = root.find("ingest")) {
      cfg.ingest = parse_ingest_schema(*ing, "ingest");
      if (ing->contains("csv")) {
        if (!(*ing)["csv"].is_string()) throw ConfigError("ingest.csv: expected a string");
        cfg.csv_path = (*ing)["csv"].get<std::string>();
      }
    }

    if (const json* sc = root.find("scenario")) {
      if (cfg.ingest) throw ConfigError("scenario: a config cannot have both scenario and ingest sections");
      if (sc->is_string()) {
        const auto tag = rethrow_with("scenario", [&] { return sim::parse_scenario(sc->get<std::string>()); });
        cfg.scenario = sim::default_scenario(tag, cfg.seed, cfg.defaults);
      } else {
        Section s(*sc, "scenario", unknown);
        parse_defaults(s, cfg.defaults);
        if (auto tag_text = s.string("tag")) {
          const auto tag = rethrow_with("scenario.tag", [&] { return sim::parse_scenario(*tag_text); });
          cfg.scenario = parse_scenario_overrides(s, sim::default_scenario(tag, cfg.seed, cfg.defaults));
        } else {
          // Defaults only (battery settings); explicit parameters need a tag.
          for (const char* k : {"mu0", "pi0", "delta", "rho", "progression", "beta_start", "beta_end", "clip",
                                "group_shifts"}) {
            if (s.find(k)) throw ConfigError(s.field(k) + ": needs scenario.tag");
          }
        }
      }
    }

    if (const json* l = root.find("learner")) {
      Section s(*l, "learner", unknown);
      parse_learner(s, cfg.plan.learner);
    }
    if (const json* m = root.find("metrics")) {
      Section s(*m, "metrics", unknown);
      parse_metrics(s, cfg.plan);
    }
    if (const json* e = root.find("evaluation")) {
      Section s(*e, "evaluation", unknown);
      parse_evaluation(s, cfg.plan, fairness_set, measure_set, groups_set);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }

  if (!groups_set && cfg.scenario) cfg.plan.groups = exp::default_groups(cfg.scenario->tag);
  cfg.plan.analyses.fairness_regression = fairness_set.value_or(!cfg.plan.groups.empty());
  cfg.plan.concept_measure =
      measure_set.value_or(cfg.empirical() ? exp::ConceptMeasure::Resid : exp::ConceptMeasure::Oracle);
  cfg.plan.master_seed = cfg.seed;
  if (cfg.name.empty()) {
    cfg.name = cfg.scenario ? std::string(sim::to_string(cfg.scenario->tag)) : cfg.empirical() ? "empirical" : "run";
  }
  cfg.plan.name = cfg.name;
  if (cfg.scenario) {
    for (const auto& g : cfg.plan.groups) {
      try {
        g.validate(cfg.scenario->schema);
      } catch (const Error& e) {
        throw ConfigError(std::string("evaluation.groups: ") + e.what());
      }
    }
  }
  if (cfg.ingest) {
    const auto schema = cfg.ingest->feature_schema();
    for (const auto& g : cfg.plan.groups) {
      try {
        g.validate(schema);
      } catch (const Error& e) {
        throw ConfigError(std::string("evaluation.groups: ") + e.what());
      }
    }
  }
  cfg.plan.validate(cfg.empirical());
  return cfg;
}

nlohmann::json config_to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  if (c.scenario) {
    j["scenario"] = scenario_to_json(*c.scenario, c.defaults);
  } else if (!c.ingest) {
    j["scenario"] = defaults_to_json(c.defaults);
  }
  if (c.ingest) {
    j["ingest"] = ingest_schema_to_json(*c.ingest);
    if (c.csv_path) j["ingest"]["csv"] = *c.csv_path;
  }
  const auto& p = c.plan;
  j["learner"] = {{"l2", p.learner.l2}, {"tol", p.learner.tol}, {"max_iter", p.learner.max_iter}};
  j["metrics"] = {{"pca_variance", p.shift.pca_variance},
                  {"knn", p.shift.knn},
                  {"js_mode", std::string(metrics::to_string(p.shift.js_mode))},
                  {"residualize", p.residualize_per_unit ? "per_unit" : "pooled"},
                  {"forest",
                   {{"trees", p.forest.trees},
                    {"min_leaf", p.forest.min_leaf},
                    {"max_depth", p.forest.max_depth},
                    {"bootstrap", p.forest.bootstrap}}}};
  if (p.shift.k) j["metrics"]["k"] = *p.shift.k;
  j["evaluation"] = plan_to_json(p);
  return j;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace driftwin::io
