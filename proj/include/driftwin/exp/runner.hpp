#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftwin/exp/plan.hpp"

namespace driftwin::exp {

// Expanding-window evaluation: for every window start, train on
// [start, train_end], score the fixed test period and measure shift. Windows
// are independent; residualized concept shift is fit afterwards, pooled over
// every window of the run (or of each institution with residualize_per_unit),
// and separately over all subgroup reports.
std::vector<WindowResult> run_plan(const ExperimentPlan& plan, const DataSource& source);

// Shift reports on subgroup-restricted rows of `window` and `test`.
std::vector<GroupShift> per_group_shift_reports(const PeriodDataset& window, const PeriodDataset& test,
                                                const std::vector<SubgroupKey>& groups,
                                                const ExperimentPlan& plan);

// Population oracle concept shift between window [start, end] and the test
// period, with per-row generating coefficients by group membership.
double oracle_concept_shift(const sim::ShiftScenarioConfig& truth, const PeriodDataset& test, int start, int end,
                            int test_period);

// theta for one report under the chosen measure.
std::optional<double> concept_value(const metrics::ShiftReport& report, ConceptMeasure measure);

// Columns: auc, cov_unified, concept (chosen measure), interaction,
// concept_raw/resid/oracle when complete, train_size, window_start and
// institution_id when any unit carries one. Usable windows only.
learn::DataTable assemble_performance_table(const std::vector<WindowResult>& results, ConceptMeasure measure);

// Columns: auc_gap, delta_cov, theta (+ institution_id). Windows with a
// defined AUC gap and at least two subgroup reports.
learn::DataTable assemble_fairness_table(const std::vector<WindowResult>& results, ConceptMeasure measure);

learn::DesignSpec performance_design(bool fixed_effects);
learn::DesignSpec fairness_design(bool fixed_effects);

struct ExperimentOutput {
  std::string name;
  ExperimentPlan plan;
  std::optional<sim::ShiftScenarioConfig> scenario;
  std::vector<WindowResult> results;
  std::map<std::string, learn::RegressionFit> fits;
  std::vector<std::string> warnings;
};

// run_plan plus every regression enabled in plan.analyses. Regression
// failures become warnings, not errors.
ExperimentOutput run_experiment(const ExperimentPlan& plan, const DataSource& source);
ExperimentOutput fit_analyses(ExperimentOutput out);

// Subgroups evaluated when none are configured: G1=0 and G1=1 for E, the four
// G1 x G2 intersections for F, none otherwise.
std::vector<SubgroupKey> default_groups(sim::Scenario tag);

struct BatteryOptions {
  std::uint64_t seed = 7;
  sim::ScenarioDefaults defaults;
  ExperimentPlan base_plan;  // learner/metric/evaluation settings shared by all experiments
};

// Scenarios A-D (performance), E with covariate and concept shift and F with
// aligned and opposed directions (fairness), in that order.
std::vector<ExperimentOutput> run_scenario_battery(const BatteryOptions& opts);

// The eight battery experiments as (plan, scenario) pairs, without running them.
std::vector<std::pair<ExperimentPlan, sim::ShiftScenarioConfig>> battery_plans(const BatteryOptions& opts);

}  // namespace driftwin::exp
