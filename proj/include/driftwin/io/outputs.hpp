#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftwin/exp/runner.hpp"

namespace driftwin::io {

// results.csv is long format: per window one row with scope "all" (overall
// AUC, AUC gap, subgroup shift gaps, full-population shift) followed by one
// row per configured subgroup (its AUC, support counts and subgroup shift).
inline constexpr std::array<std::string_view, 24> kResultsColumns = {
    "experiment", "unit",      "scope",     "window_start", "window_end",     "test_period",
    "train_size", "status",    "auc",       "auc_gap",      "delta_cov",      "theta",
    "support",    "positives", "negatives", "qualifies",    "cov_cont",       "cov_bin",
    "cov_unified", "concept_raw", "concept_resid", "concept_oracle", "d_pca", "k"};

// printf %.6g; empty for a missing value.
std::string format_value(double v);

std::string results_csv(const std::vector<exp::ExperimentOutput>& outputs);

nlohmann::json fit_to_json(const learn::RegressionFit& fit);
nlohmann::json fits_json(const std::vector<exp::ExperimentOutput>& outputs);
std::string fits_text(const std::vector<exp::ExperimentOutput>& outputs);

// Per-experiment config echo plus every window's k, d_PCA and status.
// `configs` is aligned with `outputs`; `extra` is merged at the top level.
nlohmann::json manifest_json(const std::vector<exp::ExperimentOutput>& outputs,
                             const std::vector<nlohmann::json>& configs, const nlohmann::json& extra);

// (file name, SVG text) for AUC and shift scores against window start, plus
// subgroup AUC and subgroup shift charts when the experiment has subgroups.
std::vector<std::pair<std::string, std::string>> render_charts(const exp::ExperimentOutput& output);

// Writes results.csv, fits.json, fits.txt, the charts and (unless null)
// manifest.json into out_dir, creating it if needed. Returns the file names.
std::vector<std::string> emit_outputs(const std::vector<exp::ExperimentOutput>& outputs,
                                      const nlohmann::json& manifest, const std::string& out_dir);

// Rebuilds experiment outputs (without fits) from results.csv text. Plans are
// looked up by experiment name; missing names get `fallback`.
std::vector<exp::ExperimentOutput> read_results_csv(std::string_view text,
                                                    const std::map<std::string, exp::ExperimentPlan>& plans,
                                                    const exp::ExperimentPlan& fallback);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace driftwin::io
