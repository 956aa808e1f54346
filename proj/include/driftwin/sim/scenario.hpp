#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftwin/core/dataset.hpp"
#include "driftwin/core/rng.hpp"

namespace driftwin::sim {

enum class Scenario { A, B, C, D, E, F };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view text);

// How alpha_t^X evolves over periods.
enum class Progression { Linear, ConstantZero };

enum class ShiftKind { Covariate, Concept };

std::string_view to_string(ShiftKind k);
ShiftKind parse_shift_kind(std::string_view text);

struct DriftSpec {
  Eigen::VectorXd delta_cont;  // per continuous feature mean drift direction
  Eigen::VectorXd rho_bin;     // per binary feature probability drift rate
  Progression progression = Progression::Linear;
};

// Coefficient endpoints, intercept first.
struct ConceptSpec {
  Eigen::VectorXd beta_start;
  Eigen::VectorXd beta_end;
};

// Restricts a shift to the rows where `group == shifted_value`; all other rows
// stay at their t = 1 state. `direction` scales the drift (+1 or -1).
struct GroupShiftSpec {
  std::string group;
  int shifted_value = 1;
  ShiftKind kind = ShiftKind::Concept;
  int direction = 1;

  bool operator==(const GroupShiftSpec&) const = default;
};

struct ShiftScenarioConfig {
  Scenario tag = Scenario::A;
  FeatureSchema schema;
  int periods = 50;  // T
  int n_per_period = 5000;
  Eigen::VectorXd mu0;  // continuous baseline means
  Eigen::VectorXd pi0;  // binary baseline probabilities (group columns included)
  DriftSpec drift;
  ConceptSpec beta;
  std::vector<GroupShiftSpec> group_shifts;
  double clip_lo = 0.01;
  double clip_hi = 0.99;
  std::uint64_t master_seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Knobs for drawing a default configuration; every drawn value is recorded in
// the resulting config so it can be echoed into the manifest.
struct ScenarioDefaults {
  int periods = 50;
  int n_per_period = 5000;
  int n_continuous = 15;
  int n_binary = 4;
  double drift_magnitude = 1.0;
  double rho_range = 0.3;
  double beta_range = 1.0;
  double pi0_lo = 0.2;
  double pi0_hi = 0.8;
  double group_probability = 0.5;
  ShiftKind single_group_kind = ShiftKind::Concept;  // scenario E
  bool opposed = false;                              // scenario F
};

ShiftScenarioConfig default_scenario(Scenario tag, std::uint64_t seed, const ScenarioDefaults& opts = {});

// alpha_t = (t - 1) / (T - 1).
double alpha_at(int t, int periods);
double progression_at(Progression p, int t, int periods);

Eigen::VectorXd mean_at(const Eigen::VectorXd& mu0, const Eigen::VectorXd& delta, double alpha);
Eigen::VectorXd prob_at(const Eigen::VectorXd& pi0, const Eigen::VectorXd& rho, double alpha, double clip_lo,
                        double clip_hi);
Eigen::VectorXd beta_at(const ConceptSpec& spec, double alpha);

// Group membership of one row restricted to the schema's group columns.
using Membership = std::map<std::string, int>;

// Generating coefficients for rows with the given membership at period t.
// Groups absent from `membership` are treated as not shifted.
Eigen::VectorXd true_beta(const ShiftScenarioConfig& config, int t, const Membership& membership);

// Row-weighted mean of true_beta over periods [start, end] (equal weights when
// every period has n_per_period rows).
Eigen::VectorXd window_beta(const ShiftScenarioConfig& config, int start, int end, const Membership& membership);

PeriodDataset sample_period(const ShiftScenarioConfig& config, int t, RngStream rng);

// Period t is drawn from stream (master_seed, [scenario, t]).
TemporalDataset generate(const ShiftScenarioConfig& config);

// Stream address used by generate() for period t.
RngStream period_stream(const ShiftScenarioConfig& config, int t);

}  // namespace driftwin::sim
