#include "driftwin/exp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "driftwin/core/errors.hpp"
#include "driftwin/metrics/pca.hpp"

namespace driftwin::exp {
namespace {

constexpr std::uint64_t kResidualDomain = 0x52455344ULL;

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index writes
// only its own slot, so results do not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

PeriodDataset model_view(const PeriodDataset& d, const ExperimentPlan& plan) {
  if (plan.include_group_features || d.schema().groups.empty()) return d;
  return d.drop_binary(d.schema().groups);
}

sim::Membership membership_of(const PeriodDataset& d, Index row) {
  sim::Membership m;
  for (const auto& g : d.schema().groups) {
    m.emplace(g, static_cast<int>(d.bin()(row, static_cast<Index>(*d.schema().binary_index(g)))));
  }
  return m;
}

struct Job {
  std::size_t unit = 0;
  int start = 0;
  int end = 0;
  int test = 0;
};

WindowResult run_window(const ExperimentPlan& plan, const DataSource& source, const Job& job) {
  const auto& unit = source.units[job.unit];
  const TemporalDataset& data = *unit.data;
  const PeriodDataset& test = data.at(job.test);

  WindowResult r;
  r.unit = unit.id;
  r.window_start = job.start;
  r.window_end = job.end;
  r.test_period = job.test;

  const PeriodDataset window = concat_windows(data, job.start, job.end);
  r.train_size = static_cast<std::size_t>(window.rows());
  const PeriodDataset window_m = model_view(window, plan);
  const PeriodDataset test_m = model_view(test, plan);

  r.shift = metrics::compute_shift_report(window_m, test_m, plan.shift);
  if (source.truth) r.shift.concept_oracle = oracle_concept_shift(*source.truth, test, job.start, job.end, job.test);

  const double rate = window.positive_rate();
  if (rate <= 0.0 || rate >= 1.0) {
    r.status = "degenerate_train";
  } else {
    const auto model = learn::fit_logistic(window_m, plan.learner);
    r.logistic_iterations = model.iterations;
    if (!model.converged) r.status = "nonconverged";
    const Eigen::VectorXd scores = learn::predict_proba(model, test_m.features());
    const std::span<const double> s(scores.data(), static_cast<std::size_t>(scores.size()));
    const std::span<const double> y(test.labels().data(), static_cast<std::size_t>(test.rows()));
    try {
      r.auc_overall = learn::auc(s, y);
      if (!plan.groups.empty()) r.fairness = learn::subgroup_auc(s, y, test, plan.groups, plan.support);
    } catch (const DegenerateFitError&) {
      r.status = "degenerate_test";
    }
  }

  if (plan.per_group_shift && !plan.groups.empty()) {
    r.per_group_shift = per_group_shift_reports(window, test, plan.groups, plan);
    if (source.truth) {
      for (auto& gs : r.per_group_shift) {
        if (!gs.report) continue;
        const PeriodDataset sub_test = filter_subgroup(test, gs.key);
        gs.report->concept_oracle = oracle_concept_shift(*source.truth, sub_test, job.start, job.end, job.test);
      }
    }
  }
  return r;
}

// Fits one forest over `results` for population reports (stream suffix 0) and
// one over all their subgroup reports (suffix 1), after `prefix`.
void residualize_set(const std::vector<WindowResult*>& results, const ExperimentPlan& plan,
                     std::vector<std::uint64_t> prefix) {
  auto stream = [&](std::uint64_t which) {
    auto path = prefix;
    path.insert(path.begin() + 1, which);
    return RngStream(plan.master_seed, path);
  };
  {
    std::vector<std::pair<double, double>> pairs;
    std::vector<metrics::ShiftReport*> targets;
    for (auto* r : results) {
      if (!r->shift.concept_raw) continue;
      pairs.emplace_back(r->shift.cov_unified, *r->shift.concept_raw);
      targets.push_back(&r->shift);
    }
    if (!pairs.empty()) {
      const auto res = metrics::residualize_concept_shift(pairs, plan.forest, stream(0));
      for (std::size_t i = 0; i < targets.size(); ++i) {
        targets[i]->concept_resid = res.residuals[i];
        if (res.fallback) targets[i]->warnings.push_back("too few windows to residualize; concept_resid = concept_raw");
      }
    }
  }
  // Subgroup reports, pooled across windows and subgroups.
  {
    std::vector<std::pair<double, double>> pairs;
    std::vector<metrics::ShiftReport*> targets;
    for (auto* r : results) {
      for (auto& gs : r->per_group_shift) {
        if (!gs.report || !gs.report->concept_raw) continue;
        pairs.emplace_back(gs.report->cov_unified, *gs.report->concept_raw);
        targets.push_back(&*gs.report);
      }
    }
    if (!pairs.empty()) {
      const auto res = metrics::residualize_concept_shift(pairs, plan.forest, stream(1));
      for (std::size_t i = 0; i < targets.size(); ++i) {
        targets[i]->concept_resid = res.residuals[i];
        if (res.fallback) targets[i]->warnings.push_back("too few reports to residualize; concept_resid = concept_raw");
      }
    }
  }
}

void residualize(std::vector<WindowResult>& results, const ExperimentPlan& plan) {
  if (!plan.residualize_per_unit) {
    std::vector<WindowResult*> all;
    for (auto& r : results) all.push_back(&r);
    residualize_set(all, plan, {kResidualDomain});
    return;
  }
  std::map<std::string, std::vector<WindowResult*>> by_unit;
  for (auto& r : results) by_unit[r.unit].push_back(&r);
  std::uint64_t index = 0;
  for (auto& [unit, rows] : by_unit) residualize_set(rows, plan, {kResidualDomain, index++});
}

void fill_shift_gaps(std::vector<WindowResult>& results, ConceptMeasure measure) {
  for (auto& r : results) {
    if (!r.fairness) continue;
    std::vector<double> cov, conc;
    bool concept_complete = true;
    for (const auto& gs : r.per_group_shift) {
      if (!gs.report) continue;
      cov.push_back(gs.report->cov_unified);
      if (auto c = concept_value(*gs.report, measure)) {
        conc.push_back(*c);
      } else {
        concept_complete = false;
      }
    }
    if (cov.size() < 2 || !concept_complete) continue;
    const auto [clo, chi] = std::minmax_element(cov.begin(), cov.end());
    const auto [tlo, thi] = std::minmax_element(conc.begin(), conc.end());
    r.fairness->shift_gaps = learn::GroupShiftGaps{*chi - *clo, *thi - *tlo};
  }
}

bool has_institutions(const std::vector<WindowResult>& results) {
  return std::any_of(results.begin(), results.end(), [](const auto& r) { return !r.unit.empty(); });
}

std::size_t distinct_labels(const learn::DataTable& t, const std::string& col) {
  if (!t.has_label(col)) return 0;
  const auto& v = t.label(col);
  return std::set<std::string>(v.begin(), v.end()).size();
}

}  // namespace

std::string_view to_string(ConceptMeasure m) {
  switch (m) {
    case ConceptMeasure::Oracle: return "oracle";
    case ConceptMeasure::Resid: return "resid";
    case ConceptMeasure::Raw: return "raw";
  }
  return "oracle";
}

ConceptMeasure parse_concept_measure(std::string_view text) {
  if (text == "oracle") return ConceptMeasure::Oracle;
  if (text == "resid") return ConceptMeasure::Resid;
  if (text == "raw") return ConceptMeasure::Raw;
  throw ConfigError("concept_measure: expected oracle, resid or raw, got '" + std::string(text) + "'");
}

std::string_view to_string(SubgroupBasis b) { return b == SubgroupBasis::Local ? "local" : "global"; }

SubgroupBasis parse_subgroup_basis(std::string_view text) {
  if (text == "local") return SubgroupBasis::Local;
  if (text == "global") return SubgroupBasis::Global;
  throw ConfigError("subgroup_basis: expected local or global, got '" + std::string(text) + "'");
}

void ExperimentPlan::validate(bool empirical) const {
  if (test_period && train_end && *train_end + 1 > *test_period) {
    throw ConfigError("plan.train_end: must be before test_period");
  }
  for (int s : window_starts) {
    if (train_end && s > *train_end) throw ConfigError("plan.window_starts: start " + std::to_string(s) + " after train_end");
    if (test_period && s >= *test_period) {
      throw ConfigError("plan.window_starts: start " + std::to_string(s) + " not before test period");
    }
  }
  if (!(shift.pca_variance > 0.0 && shift.pca_variance <= 1.0)) {
    throw ConfigError("metrics.pca_variance: must lie in (0, 1]");
  }
  if (shift.k && *shift.k < 1) throw ConfigError("metrics.k: must be positive");
  if (!shift.knn && concept_measure != ConceptMeasure::Oracle) {
    throw ConfigError("metrics.knn: the kNN estimator is required unless concept_measure is oracle");
  }
  if (empirical && concept_measure == ConceptMeasure::Oracle) {
    throw ConfigError("evaluation.concept_measure: oracle concept shift needs simulated ground truth");
  }
  if (learner.tol <= 0.0 || learner.max_iter < 1 || learner.l2 < 0.0) throw ConfigError("learner: invalid options");
  if (forest.trees < 1 || forest.min_leaf < 1) throw ConfigError("metrics.forest: invalid options");
}

DataSource DataSource::simulated(const sim::ShiftScenarioConfig& config) {
  DataSource s;
  s.units.push_back({"", std::make_shared<const TemporalDataset>(sim::generate(config))});
  s.truth = config;
  return s;
}

DataSource DataSource::empirical(std::vector<Unit> units) {
  if (units.empty()) throw ConfigError("empirical source: no data");
  DataSource s;
  s.units = std::move(units);
  std::sort(s.units.begin(), s.units.end(), [](const Unit& a, const Unit& b) { return a.id < b.id; });
  return s;
}

double oracle_concept_shift(const sim::ShiftScenarioConfig& truth, const PeriodDataset& test, int start, int end,
                            int test_period) {
  if (test.rows() == 0) throw MetricError("oracle concept shift: empty test set");
  std::map<sim::Membership, std::vector<Index>> by_pattern;
  for (Index i = 0; i < test.rows(); ++i) by_pattern[membership_of(test, i)].push_back(i);
  const Eigen::MatrixXd x = test.features();
  double total = 0.0;
  for (const auto& [m, rows] : by_pattern) {
    const Eigen::VectorXd b_train = sim::window_beta(truth, start, end, m);
    const Eigen::VectorXd b_test = sim::true_beta(truth, test_period, m);
    const Eigen::MatrixXd xs = x(rows, Eigen::all);
    total += metrics::concept_shift_oracle(b_train, b_test, xs) * static_cast<double>(rows.size());
  }
  return total / static_cast<double>(test.rows());
}

std::vector<GroupShift> per_group_shift_reports(const PeriodDataset& window, const PeriodDataset& test,
                                                const std::vector<SubgroupKey>& groups,
                                                const ExperimentPlan& plan) {
  std::optional<metrics::PcaBasis> global_basis;
  const PeriodDataset window_m = model_view(window, plan);
  if (plan.subgroup_basis == SubgroupBasis::Global && window_m.cont().cols() > 0) {
    try {
      global_basis = metrics::fit_pca(window_m.cont(), plan.shift.pca_variance);
    } catch (const MetricError&) {
    }
  }
  const auto min_rows = std::max<std::size_t>(2, plan.support.min_support);
  std::vector<GroupShift> out;
  for (const auto& key : groups) {
    GroupShift gs;
    gs.key = key;
    const PeriodDataset sub_window = model_view(filter_subgroup(window, key), plan);
    const PeriodDataset sub_test = model_view(filter_subgroup(test, key), plan);
    const auto wn = static_cast<std::size_t>(sub_window.rows());
    const auto tn = static_cast<std::size_t>(sub_test.rows());
    const std::size_t k_needed = plan.shift.knn ? static_cast<std::size_t>(plan.shift.k.value_or(1)) : 1;
    if (wn < min_rows || tn < min_rows || wn < k_needed || tn < k_needed) {
      gs.note = "subgroup too small (" + std::to_string(wn) + " window rows, " + std::to_string(tn) + " test rows)";
    } else if (plan.subgroup_basis == SubgroupBasis::Global) {
      gs.report = metrics::compute_shift_report(sub_window, sub_test, plan.shift, global_basis);
    } else {
      gs.report = metrics::compute_shift_report(sub_window, sub_test, plan.shift);
    }
    out.push_back(std::move(gs));
  }
  return out;
}

std::vector<WindowResult> run_plan(const ExperimentPlan& plan, const DataSource& source) {
  plan.validate(source.is_empirical());
  std::vector<Job> jobs;
  for (std::size_t u = 0; u < source.units.size(); ++u) {
    const auto& data = *source.units[u].data;
    const std::string where = source.units[u].id.empty() ? "" : " (institution " + source.units[u].id + ")";
    const int test = plan.test_period.value_or(data.last_period());
    if (!data.contains(test)) throw RangeError("test period " + std::to_string(test) + " not present" + where);
    const int end = plan.train_end.value_or(test - 1);
    if (end >= test) throw ConfigError("plan.train_end: must precede the test period");
    std::vector<int> starts = plan.window_starts;
    if (starts.empty()) {
      for (int p : data.period_indices()) {
        if (p <= end) starts.push_back(p);
      }
    }
    if (starts.empty()) throw RangeError("no training periods before test period " + std::to_string(test) + where);
    if (!data.contains(end)) throw RangeError("train_end period " + std::to_string(end) + " not present" + where);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    for (int s : starts) {
      if (!data.contains(s)) throw RangeError("window start " + std::to_string(s) + " not present" + where);
      if (s > end) throw ConfigError("plan.window_starts: start " + std::to_string(s) + " after train_end");
      jobs.push_back({u, s, end, test});
    }
  }
  for (const auto& key : plan.groups) key.validate(source.units.front().data->schema());

  std::vector<WindowResult> results(jobs.size());
  parallel_for(jobs.size(), plan.threads, [&](std::size_t i) { results[i] = run_window(plan, source, jobs[i]); });
  residualize(results, plan);
  fill_shift_gaps(results, plan.concept_measure);
  return results;
}

std::optional<double> concept_value(const metrics::ShiftReport& report, ConceptMeasure measure) {
  switch (measure) {
    case ConceptMeasure::Oracle: return report.concept_oracle;
    case ConceptMeasure::Resid: return report.concept_resid;
    case ConceptMeasure::Raw: return report.concept_raw;
  }
  return std::nullopt;
}

learn::DataTable assemble_performance_table(const std::vector<WindowResult>& results, ConceptMeasure measure) {
  std::vector<const WindowResult*> rows;
  for (const auto& r : results) {
    if (r.usable() && r.auc_overall && concept_value(r.shift, measure)) rows.push_back(&r);
  }
  if (rows.empty()) throw DegenerateFitError("performance table: no usable windows");

  std::vector<double> auc, cov, conc, inter, size, start;
  std::vector<double> raw, resid, oracle;
  bool raw_ok = true, resid_ok = true, oracle_ok = true;
  std::vector<std::string> inst;
  for (const auto* r : rows) {
    const double c = *concept_value(r->shift, measure);
    auc.push_back(*r->auc_overall);
    cov.push_back(r->shift.cov_unified);
    conc.push_back(c);
    inter.push_back(r->shift.cov_unified * c);
    size.push_back(static_cast<double>(r->train_size));
    start.push_back(r->window_start);
    raw_ok = raw_ok && r->shift.concept_raw;
    resid_ok = resid_ok && r->shift.concept_resid;
    oracle_ok = oracle_ok && r->shift.concept_oracle;
    raw.push_back(r->shift.concept_raw.value_or(0.0));
    resid.push_back(r->shift.concept_resid.value_or(0.0));
    oracle.push_back(r->shift.concept_oracle.value_or(0.0));
    inst.push_back(r->unit);
  }
  learn::DataTable t;
  t.add_numeric("auc", std::move(auc));
  t.add_numeric("cov_unified", std::move(cov));
  t.add_numeric("concept", std::move(conc));
  t.add_numeric("interaction", std::move(inter));
  if (raw_ok) t.add_numeric("concept_raw", std::move(raw));
  if (resid_ok) t.add_numeric("concept_resid", std::move(resid));
  if (oracle_ok) t.add_numeric("concept_oracle", std::move(oracle));
  t.add_numeric("train_size", std::move(size));
  t.add_numeric("window_start", std::move(start));
  if (has_institutions(results)) t.add_label("institution_id", std::move(inst));
  return t;
}

learn::DataTable assemble_fairness_table(const std::vector<WindowResult>& results, ConceptMeasure measure) {
  std::vector<double> gap, delta, theta, size;
  std::vector<std::string> inst;
  for (const auto& r : results) {
    if (!r.usable() || !r.fairness || !r.fairness->auc_gap) continue;
    // Gaps are recomputed here so the table can use any measure.
    std::vector<double> cov, conc;
    bool complete = true;
    for (const auto& gs : r.per_group_shift) {
      if (!gs.report) continue;
      cov.push_back(gs.report->cov_unified);
      if (auto c = concept_value(*gs.report, measure)) {
        conc.push_back(*c);
      } else {
        complete = false;
      }
    }
    if (cov.size() < 2 || !complete) continue;
    gap.push_back(*r.fairness->auc_gap);
    delta.push_back(*std::max_element(cov.begin(), cov.end()) - *std::min_element(cov.begin(), cov.end()));
    theta.push_back(*std::max_element(conc.begin(), conc.end()) -
                    *std::min_element(conc.begin(), conc.end()));
    size.push_back(static_cast<double>(r.train_size));
    inst.push_back(r.unit);
  }
  if (gap.empty()) throw DegenerateFitError("fairness table: no window has an AUC gap and subgroup shift reports");
  learn::DataTable t;
  t.add_numeric("auc_gap", std::move(gap));
  t.add_numeric("delta_cov", std::move(delta));
  t.add_numeric("theta", std::move(theta));
  t.add_numeric("train_size", std::move(size));
  if (has_institutions(results)) t.add_label("institution_id", std::move(inst));
  return t;
}

learn::DesignSpec performance_design(bool fixed_effects) {
  learn::DesignSpec spec;
  spec.response = "auc";
  spec.terms = {"cov_unified", "concept", "interaction"};
  if (fixed_effects) spec.fixed_effect = "institution_id";
  return spec;
}

learn::DesignSpec fairness_design(bool fixed_effects) {
  learn::DesignSpec spec;
  spec.response = "auc_gap";
  spec.terms = {"delta_cov", "theta"};
  if (fixed_effects) spec.fixed_effect = "institution_id";
  return spec;
}

ExperimentOutput fit_analyses(ExperimentOutput out) {
  const auto& plan = out.plan;
  auto attempt = [&](const std::string& what, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      out.warnings.push_back(what + ": " + e.what());
    }
  };
  if (plan.analyses.performance_regression || plan.analyses.tertile_analysis) {
    attempt("performance regression", [&] {
      const auto table = assemble_performance_table(out.results, plan.concept_measure);
      const auto spec = performance_design(distinct_labels(table, "institution_id") > 1);
      if (plan.analyses.performance_regression) {
        out.fits["performance"] = learn::ols_fit(spec, table);
        for (const auto& d : out.fits["performance"].dropped) out.warnings.push_back("performance: dropped collinear column " + d);
      }
      if (plan.analyses.tertile_analysis) {
        attempt("tertile analysis", [&] {
          const auto fits = learn::tertile_split_fit(table, "train_size", spec);
          out.fits["performance_tertile_low"] = fits[0];
          out.fits["performance_tertile_medium"] = fits[1];
          out.fits["performance_tertile_high"] = fits[2];
        });
      }
    });
  }
  if (plan.analyses.fairness_regression) {
    attempt("fairness regression", [&] {
      const auto table = assemble_fairness_table(out.results, plan.concept_measure);
      out.fits["fairness"] = learn::ols_fit(fairness_design(distinct_labels(table, "institution_id") > 1), table);
      for (const auto& d : out.fits["fairness"].dropped) out.warnings.push_back("fairness: dropped collinear column " + d);
    });
  }
  return out;
}

ExperimentOutput run_experiment(const ExperimentPlan& plan, const DataSource& source) {
  ExperimentOutput out;
  out.name = plan.name;
  out.plan = plan;
  out.scenario = source.truth;
  out.results = run_plan(plan, source);
  for (const auto& r : out.results) {
    if (!r.usable()) {
      out.warnings.push_back("window " + std::to_string(r.window_start) + (r.unit.empty() ? "" : " of " + r.unit) +
                             " flagged " + r.status);
    }
  }
  return fit_analyses(std::move(out));
}

std::vector<SubgroupKey> default_groups(sim::Scenario tag) {
  std::vector<SubgroupKey> groups;
  if (tag == sim::Scenario::E) {
    groups = {SubgroupKey{{{"G1", 0}}}, SubgroupKey{{{"G1", 1}}}};
  } else if (tag == sim::Scenario::F) {
    for (int g1 = 0; g1 <= 1; ++g1) {
      for (int g2 = 0; g2 <= 1; ++g2) groups.push_back(SubgroupKey{{{"G1", g1}, {"G2", g2}}});
    }
  }
  return groups;
}

std::vector<std::pair<ExperimentPlan, sim::ShiftScenarioConfig>> battery_plans(const BatteryOptions& opts) {
  using sim::Scenario;
  struct Entry {
    std::string name;
    Scenario tag;
    sim::ShiftKind kind;
    bool opposed;
  };
  const std::vector<Entry> entries = {
      {"A", Scenario::A, sim::ShiftKind::Concept, false},
      {"B", Scenario::B, sim::ShiftKind::Concept, false},
      {"C", Scenario::C, sim::ShiftKind::Concept, false},
      {"D", Scenario::D, sim::ShiftKind::Concept, false},
      {"E-covariate", Scenario::E, sim::ShiftKind::Covariate, false},
      {"E-concept", Scenario::E, sim::ShiftKind::Concept, false},
      {"F-aligned", Scenario::F, sim::ShiftKind::Concept, false},
      {"F-opposed", Scenario::F, sim::ShiftKind::Concept, true},
  };
  std::vector<std::pair<ExperimentPlan, sim::ShiftScenarioConfig>> out;
  for (const auto& e : entries) {
    sim::ScenarioDefaults d = opts.defaults;
    d.single_group_kind = e.kind;
    d.opposed = e.opposed;
    auto cfg = sim::default_scenario(e.tag, opts.seed, d);
    ExperimentPlan plan = opts.base_plan;
    plan.name = e.name;
    plan.master_seed = opts.seed;
    plan.groups = default_groups(e.tag);
    const bool grouped = !plan.groups.empty();
    plan.analyses.performance_regression = true;
    plan.analyses.fairness_regression = grouped;
    out.emplace_back(std::move(plan), std::move(cfg));
  }
  return out;
}

std::vector<ExperimentOutput> run_scenario_battery(const BatteryOptions& opts) {
  std::vector<ExperimentOutput> out;
  for (const auto& [plan, cfg] : battery_plans(opts)) {
    out.push_back(run_experiment(plan, DataSource::simulated(cfg)));
  }
  return out;
}

}  // namespace driftwin::exp
