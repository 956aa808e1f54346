#include "driftwin/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "driftwin/core/errors.hpp"
#include "driftwin/learn/logistic.hpp"

namespace driftwin::sim {
namespace {

constexpr std::uint64_t kParamDomain = 0x5041524DULL;  // default-parameter draws

std::uint64_t scenario_code(Scenario s) { return static_cast<std::uint64_t>(s) + 1; }

bool all_zero(const Eigen::VectorXd& v) { return v.size() == 0 || v.isZero(0.0); }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

// Sum of directions of the specs of `kind` whose group condition the row meets.
double shift_scale(const ShiftScenarioConfig& config, ShiftKind kind, const Membership& membership,
                   bool* any_spec) {
  double scale = 0.0;
  bool any = false;
  for (const auto& spec : config.group_shifts) {
    if (spec.kind != kind) continue;
    any = true;
    auto it = membership.find(spec.group);
    if (it != membership.end() && it->second == spec.shifted_value) scale += spec.direction;
  }
  if (any_spec) *any_spec = any;
  return scale;
}

}  // namespace

std::string_view to_string(Scenario s) {
  static constexpr std::string_view names[] = {"A", "B", "C", "D", "E", "F"};
  return names[static_cast<int>(s)];
}

Scenario parse_scenario(std::string_view text) {
  if (text.size() == 1 && text[0] >= 'A' && text[0] <= 'F') return static_cast<Scenario>(text[0] - 'A');
  throw ConfigError("scenario: expected one of A-F, got '" + std::string(text) + "'");
}

std::string_view to_string(ShiftKind k) { return k == ShiftKind::Covariate ? "covariate" : "concept"; }

ShiftKind parse_shift_kind(std::string_view text) {
  if (text == "covariate") return ShiftKind::Covariate;
  if (text == "concept") return ShiftKind::Concept;
  throw ConfigError("shift kind: expected 'covariate' or 'concept', got '" + std::string(text) + "'");
}

void ShiftScenarioConfig::validate() const {
  try {
    schema.validate();
  } catch (const SchemaError& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
  const auto d_cont = static_cast<Index>(schema.continuous.size());
  const auto d_bin = static_cast<Index>(schema.binary.size());
  const Index d = d_cont + d_bin + 1;

  require(periods >= 2, "periods", "T must be at least 2");
  require(n_per_period >= 1, "n_per_period", "must be at least 1");
  require(clip_lo > 0.0 && clip_lo < clip_hi && clip_hi < 1.0, "clip", "need 0 < lo < hi < 1");
  require(mu0.size() == d_cont, "mu0", "length must equal the number of continuous features");
  require(pi0.size() == d_bin, "pi0", "length must equal the number of binary features");
  for (Index j = 0; j < pi0.size(); ++j) {
    require(pi0[j] > 0.0 && pi0[j] < 1.0, "pi0[" + std::to_string(j) + "]", "must lie strictly in (0, 1)");
  }
  require(drift.delta_cont.size() == d_cont, "drift.delta", "length must equal the number of continuous features");
  require(drift.rho_bin.size() == d_bin, "drift.rho", "length must equal the number of binary features");
  require(drift.delta_cont.allFinite() && drift.rho_bin.allFinite(), "drift", "entries must be finite");
  for (const auto& g : schema.groups) {
    const auto j = static_cast<Index>(*schema.binary_index(g));
    require(drift.rho_bin[j] == 0.0, "drift.rho[" + std::to_string(j) + "]", "group column '" + g + "' cannot drift");
  }
  require(beta.beta_start.size() == d, "beta.beta_start", "length must be 1 + number of features");
  require(beta.beta_end.size() == d, "beta.beta_end", "length must be 1 + number of features");
  require(beta.beta_start.allFinite() && beta.beta_end.allFinite(), "beta", "entries must be finite");

  std::set<std::string> shifted_groups;
  for (std::size_t i = 0; i < group_shifts.size(); ++i) {
    const auto& gs = group_shifts[i];
    const std::string field = "group_shifts[" + std::to_string(i) + "]";
    require(schema.is_group(gs.group), field + ".group", "'" + gs.group + "' is not a group column");
    require(gs.shifted_value == 0 || gs.shifted_value == 1, field + ".shifted_value", "must be 0 or 1");
    require(gs.direction == 1 || gs.direction == -1, field + ".direction", "must be +1 or -1");
    shifted_groups.insert(gs.group);
  }

  const bool drifts = !all_zero(drift.delta_cont) || !all_zero(drift.rho_bin);
  const bool concept_moves = beta.beta_start != beta.beta_end;
  const std::string tag_field = "scenario " + std::string(to_string(tag));
  switch (tag) {
    case Scenario::A:
      require(!drifts && !concept_moves && group_shifts.empty(), tag_field,
              "no drift, identical beta endpoints and no group shifts required");
      break;
    case Scenario::B:
      require(drifts && !concept_moves && group_shifts.empty(), tag_field,
              "covariate drift with identical beta endpoints required");
      break;
    case Scenario::C:
      require(!drifts && concept_moves && group_shifts.empty(), tag_field,
              "differing beta endpoints without covariate drift required");
      break;
    case Scenario::D:
      require(drifts && concept_moves && group_shifts.empty(), tag_field,
              "both covariate drift and differing beta endpoints required");
      break;
    case Scenario::E:
      require(group_shifts.size() == 1, tag_field, "exactly one group shift required");
      if (group_shifts[0].kind == ShiftKind::Covariate) {
        require(drifts && !concept_moves, tag_field, "covariate group shift needs drift and fixed beta");
      } else {
        require(concept_moves && !drifts, tag_field, "concept group shift needs differing beta and no drift");
      }
      break;
    case Scenario::F:
      require(group_shifts.size() == 2 && shifted_groups.size() == 2, tag_field,
              "exactly two group shifts on distinct groups required");
      require(group_shifts[0].kind == ShiftKind::Concept && group_shifts[1].kind == ShiftKind::Concept, tag_field,
              "both group shifts must be concept shifts");
      require(concept_moves && !drifts, tag_field, "differing beta endpoints and no drift required");
      break;
  }
}

ShiftScenarioConfig default_scenario(Scenario tag, std::uint64_t seed, const ScenarioDefaults& opts) {
  ShiftScenarioConfig cfg;
  cfg.tag = tag;
  cfg.master_seed = seed;
  cfg.periods = opts.periods;
  cfg.n_per_period = opts.n_per_period;

  for (int j = 1; j <= opts.n_continuous; ++j) cfg.schema.continuous.push_back("x" + std::to_string(j));
  for (int j = 1; j <= opts.n_binary; ++j) cfg.schema.binary.push_back("b" + std::to_string(j));
  const int n_groups = tag == Scenario::E ? 1 : tag == Scenario::F ? 2 : 0;
  for (int g = 1; g <= n_groups; ++g) {
    cfg.schema.binary.push_back("G" + std::to_string(g));
    cfg.schema.groups.push_back("G" + std::to_string(g));
  }
  const Index d_cont = opts.n_continuous;
  const Index d_bin = opts.n_binary + n_groups;

  // Every draw comes from a scenario-independent stream, so all scenarios
  // built from one seed share baseline parameters; group entries come last.
  const RngStream params(seed, {kParamDomain});
  RngStream pi_rng = params.child(1);
  RngStream delta_rng = params.child(2);
  RngStream rho_rng = params.child(3);
  RngStream b0_rng = params.child(4);
  RngStream b1_rng = params.child(5);

  cfg.mu0 = Eigen::VectorXd::Zero(d_cont);
  cfg.pi0.resize(d_bin);
  Eigen::VectorXd delta(d_cont), rho = Eigen::VectorXd::Zero(d_bin);
  for (Index j = 0; j < d_bin; ++j) {
    if (j < opts.n_binary) {
      cfg.pi0[j] = pi_rng.uniform(opts.pi0_lo, opts.pi0_hi);
      rho[j] = rho_rng.uniform(-opts.rho_range, opts.rho_range);
    } else {
      cfg.pi0[j] = opts.group_probability;
    }
  }
  for (Index j = 0; j < d_cont; ++j) delta[j] = (delta_rng.uniform() < 0.5 ? -1.0 : 1.0) * opts.drift_magnitude;
  const Index d = d_cont + d_bin + 1;
  Eigen::VectorXd b0(d), b1(d);
  for (Index j = 0; j < d; ++j) {
    b0[j] = b0_rng.uniform(-opts.beta_range, opts.beta_range);
    b1[j] = b1_rng.uniform(-opts.beta_range, opts.beta_range);
  }

  bool use_drift = false;
  bool use_concept = false;
  switch (tag) {
    case Scenario::A: break;
    case Scenario::B: use_drift = true; break;
    case Scenario::C: use_concept = true; break;
    case Scenario::D: use_drift = use_concept = true; break;
    case Scenario::E:
      use_drift = opts.single_group_kind == ShiftKind::Covariate;
      use_concept = !use_drift;
      cfg.group_shifts.push_back({"G1", 1, opts.single_group_kind, 1});
      break;
    case Scenario::F:
      use_concept = true;
      cfg.group_shifts.push_back({"G1", 1, ShiftKind::Concept, 1});
      cfg.group_shifts.push_back({"G2", 1, ShiftKind::Concept, opts.opposed ? -1 : 1});
      break;
  }
  cfg.drift.delta_cont = use_drift ? delta : Eigen::VectorXd::Zero(d_cont);
  cfg.drift.rho_bin = use_drift ? rho : Eigen::VectorXd::Zero(d_bin);
  cfg.drift.progression = Progression::Linear;
  cfg.beta.beta_start = b0;
  cfg.beta.beta_end = use_concept ? b1 : b0;
  cfg.validate();
  return cfg;
}

double alpha_at(int t, int periods) {
  if (periods < 2) throw ConfigError("periods: T must be at least 2");
  if (t < 1 || t > periods) {
    throw RangeError("period " + std::to_string(t) + " outside [1, " + std::to_string(periods) + "]");
  }
  return static_cast<double>(t - 1) / static_cast<double>(periods - 1);
}

double progression_at(Progression p, int t, int periods) {
  const double a = alpha_at(t, periods);
  return p == Progression::Linear ? a : 0.0;
}

Eigen::VectorXd mean_at(const Eigen::VectorXd& mu0, const Eigen::VectorXd& delta, double alpha) {
  if (mu0.size() != delta.size()) throw ConfigError("mean_at: mu0 and delta lengths differ");
  return mu0 + delta * alpha;
}

Eigen::VectorXd prob_at(const Eigen::VectorXd& pi0, const Eigen::VectorXd& rho, double alpha, double clip_lo,
                        double clip_hi) {
  if (!(clip_lo > 0.0 && clip_lo < clip_hi && clip_hi < 1.0)) {
    throw ConfigError("prob_at: clip bounds need 0 < lo < hi < 1");
  }
  if (pi0.size() != rho.size()) throw ConfigError("prob_at: pi0 and rho lengths differ");
  return (pi0 + rho * alpha).cwiseMax(clip_lo).cwiseMin(clip_hi);
}

Eigen::VectorXd beta_at(const ConceptSpec& spec, double alpha) {
  return (1.0 - alpha) * spec.beta_start + alpha * spec.beta_end;
}

Eigen::VectorXd true_beta(const ShiftScenarioConfig& config, int t, const Membership& membership) {
  const double alpha = alpha_at(t, config.periods);
  bool grouped = false;
  const double scale = shift_scale(config, ShiftKind::Concept, membership, &grouped);
  if (!grouped) return beta_at(config.beta, alpha);
  return config.beta.beta_start + (scale * alpha) * (config.beta.beta_end - config.beta.beta_start);
}

Eigen::VectorXd window_beta(const ShiftScenarioConfig& config, int start, int end, const Membership& membership) {
  if (start > end) throw RangeError("window_beta: inverted window");
  // beta is affine in alpha, so the window mean is beta at the mean alpha.
  // This keeps a stationary group's window beta bit-identical to its test beta.
  double alpha = 0.0;
  for (int t = start; t <= end; ++t) alpha += alpha_at(t, config.periods);
  alpha /= static_cast<double>(end - start + 1);
  bool grouped = false;
  const double scale = shift_scale(config, ShiftKind::Concept, membership, &grouped);
  if (!grouped) return beta_at(config.beta, alpha);
  return config.beta.beta_start + (scale * alpha) * (config.beta.beta_end - config.beta.beta_start);
}

RngStream period_stream(const ShiftScenarioConfig& config, int t) {
  return RngStream(config.master_seed, {scenario_code(config.tag), static_cast<std::uint64_t>(t)});
}

PeriodDataset sample_period(const ShiftScenarioConfig& config, int t, RngStream rng) {
  const auto& schema = config.schema;
  const auto d_cont = static_cast<Index>(schema.continuous.size());
  const auto d_bin = static_cast<Index>(schema.binary.size());
  const Index n = config.n_per_period;
  const double alpha_x = progression_at(config.drift.progression, t, config.periods);

  std::vector<Index> group_cols;
  for (const auto& g : schema.groups) group_cols.push_back(static_cast<Index>(*schema.binary_index(g)));
  std::vector<bool> is_group_col(static_cast<std::size_t>(d_bin), false);
  for (Index j : group_cols) is_group_col[static_cast<std::size_t>(j)] = true;

  // Distribution parameters depend on a row only through its group pattern.
  struct Pattern {
    Eigen::VectorXd mean, prob, beta;
  };
  std::map<Membership, Pattern> patterns;
  auto pattern_for = [&](const Membership& m) -> const Pattern& {
    auto it = patterns.find(m);
    if (it != patterns.end()) return it->second;
    bool grouped_cov = false;
    const double cov_scale = shift_scale(config, ShiftKind::Covariate, m, &grouped_cov);
    const double a = grouped_cov ? cov_scale * alpha_x : alpha_x;
    Pattern p;
    p.mean = config.mu0 + config.drift.delta_cont * a;
    p.prob = (config.pi0 + config.drift.rho_bin * a).cwiseMax(config.clip_lo).cwiseMin(config.clip_hi);
    p.beta = true_beta(config, t, m);
    return patterns.emplace(m, std::move(p)).first->second;
  };

  Eigen::MatrixXd cont(n, d_cont);
  Eigen::MatrixXd bin(n, d_bin);
  Eigen::VectorXd y(n);
  Eigen::VectorXd x(d_cont + d_bin);
  for (Index i = 0; i < n; ++i) {
    Membership m;
    for (std::size_t g = 0; g < group_cols.size(); ++g) {
      const Index j = group_cols[g];
      const int v = rng.bernoulli(config.pi0[j]) ? 1 : 0;
      bin(i, j) = v;
      m.emplace(schema.groups[g], v);
    }
    const Pattern& p = pattern_for(m);
    for (Index j = 0; j < d_cont; ++j) cont(i, j) = p.mean[j] + rng.normal();
    for (Index j = 0; j < d_bin; ++j) {
      if (!is_group_col[static_cast<std::size_t>(j)]) bin(i, j) = rng.bernoulli(p.prob[j]) ? 1.0 : 0.0;
    }
    x << cont.row(i).transpose(), bin.row(i).transpose();
    const double eta = p.beta[0] + x.dot(p.beta.tail(x.size()));
    y[i] = rng.bernoulli(learn::sigmoid(eta)) ? 1.0 : 0.0;
  }
  return PeriodDataset(t, schema, std::move(cont), std::move(bin), std::move(y));
}

TemporalDataset generate(const ShiftScenarioConfig& config) {
  config.validate();
  std::vector<PeriodDataset> periods;
  periods.reserve(static_cast<std::size_t>(config.periods));
  for (int t = 1; t <= config.periods; ++t) periods.push_back(sample_period(config, t, period_stream(config, t)));
  return TemporalDataset(std::move(periods));
}

}  // namespace driftwin::sim
