#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftwin/core/dataset.hpp"
#include "driftwin/learn/auc.hpp"
#include "driftwin/learn/logistic.hpp"
#include "driftwin/learn/ols.hpp"
#include "driftwin/metrics/forest.hpp"
#include "driftwin/metrics/report.hpp"
#include "driftwin/sim/scenario.hpp"

namespace driftwin::exp {

// Which concept-shift score enters the regressions as theta.
enum class ConceptMeasure { Oracle, Resid, Raw };

// Whether subgroup shift metrics refit standardization/PCA on the subgroup's
// own window rows or reuse the full-window basis.
enum class SubgroupBasis { Local, Global };

std::string_view to_string(ConceptMeasure m);
ConceptMeasure parse_concept_measure(std::string_view text);
std::string_view to_string(SubgroupBasis b);
SubgroupBasis parse_subgroup_basis(std::string_view text);

struct Analyses {
  bool performance_regression = true;
  bool fairness_regression = false;
  bool tertile_analysis = false;

  bool operator==(const Analyses&) const = default;
};

struct ExperimentPlan {
  std::string name = "experiment";
  std::optional<int> test_period;  // default: last period of each unit
  std::optional<int> train_end;    // default: test_period - 1
  std::vector<int> window_starts;  // default: every period up to train_end
  std::vector<SubgroupKey> groups;
  bool include_group_features = true;
  bool per_group_shift = true;
  SubgroupBasis subgroup_basis = SubgroupBasis::Local;
  learn::LogisticOptions learner;
  metrics::ShiftOptions shift;
  metrics::ForestOptions forest;
  learn::SupportRule support;
  ConceptMeasure concept_measure = ConceptMeasure::Oracle;
  // Residualization forests are fit over all windows of a run by default, or
  // separately per institution.
  bool residualize_per_unit = false;
  Analyses analyses;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate(bool empirical) const;
};

// Where windows come from: one simulated dataset with its generating
// parameters, or one or more ingested institutions.
struct DataSource {
  struct Unit {
    std::string id;  // institution id; empty in simulation
    std::shared_ptr<const TemporalDataset> data;
  };
  std::vector<Unit> units;
  std::optional<sim::ShiftScenarioConfig> truth;

  static DataSource simulated(const sim::ShiftScenarioConfig& config);
  static DataSource empirical(std::vector<Unit> units);
  bool is_empirical() const { return !truth.has_value(); }
};

struct GroupShift {
  SubgroupKey key;
  std::optional<metrics::ShiftReport> report;  // absent when the subgroup is too small
  std::string note;
};

struct WindowResult {
  std::string unit;
  int window_start = 0;
  int window_end = 0;
  int test_period = 0;
  std::size_t train_size = 0;
  std::optional<double> auc_overall;
  metrics::ShiftReport shift;
  std::optional<learn::FairnessRecord> fairness;
  std::vector<GroupShift> per_group_shift;
  std::string status = "ok";  // ok | nonconverged | degenerate_train | degenerate_test
  int logistic_iterations = 0;

  // Degenerate windows stay in outputs but are excluded from regressions.
  bool usable() const { return status == "ok" || status == "nonconverged"; }
};

}  // namespace driftwin::exp
