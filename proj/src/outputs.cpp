#include "driftwin/io/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "driftwin/core/errors.hpp"
#include "driftwin/io/ingest.hpp"

namespace driftwin::io {
namespace {

using nlohmann::json;

std::string opt(const std::optional<double>& v) { return v ? format_value(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void shift_fields(std::vector<std::string>& f, const metrics::ShiftReport& s) {
  f.push_back(format_value(s.cov_cont));
  f.push_back(format_value(s.cov_bin));
  f.push_back(format_value(s.cov_unified));
  f.push_back(opt(s.concept_raw));
  f.push_back(opt(s.concept_resid));
  f.push_back(opt(s.concept_oracle));
  f.push_back(std::to_string(s.d_pca));
  f.push_back(std::to_string(s.k));
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  return out.empty() ? "experiment" : out;
}

// --- SVG line charts ---

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool right_axis = false;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return lo > hi; }
  Range padded() const {
    Range r = *this;
    if (r.empty()) return {0.0, 1.0};
    double span = r.hi - r.lo;
    if (span < 1e-12) span = std::max(std::abs(r.hi), 1.0) * 0.1;
    r.lo -= 0.05 * span;
    r.hi += 0.05 * span;
    return r;
  }
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& left_label,
                       const std::string& right_label, const std::vector<Series>& series) {
  constexpr double W = 760, H = 400, L = 70, R = 80, T = 40, B = 110;
  const double pw = W - L - R, ph = H - T - B;
  Range xr, lr, rr;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xr.add(x);
      (s.right_axis ? rr : lr).add(y);
    }
  }
  if (xr.empty()) xr = {0.0, 1.0};
  if (xr.hi - xr.lo < 1e-12) {
    xr.lo -= 1.0;
    xr.hi += 1.0;
  }
  lr = lr.padded();
  rr = rr.padded();
  auto sx = [&](double x) { return L + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double y, const Range& r) { return T + ph - (y - r.lo) / (r.hi - r.lo) * ph; };
  const bool has_right = std::any_of(series.begin(), series.end(), [](const Series& s) { return s.right_axis; });

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << " " << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
      << "</text>\n";
  svg << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    svg << "<line x1=\"" << num(sx(fx)) << "\" y1=\"" << num(T + ph) << "\" x2=\"" << num(sx(fx)) << "\" y2=\""
        << num(T + ph + 4) << "\" stroke=\"#333\"/>";
    svg << "<text x=\"" << num(sx(fx)) << "\" y=\"" << num(T + ph + 16) << "\" text-anchor=\"middle\">"
        << tick_label(fx) << "</text>\n";
    const double fl = lr.lo + (lr.hi - lr.lo) * i / 5.0;
    svg << "<line x1=\"" << num(L) << "\" y1=\"" << num(sy(fl, lr)) << "\" x2=\"" << num(L + pw) << "\" y2=\""
        << num(sy(fl, lr)) << "\" stroke=\"#eee\"/>";
    svg << "<text x=\"" << num(L - 6) << "\" y=\"" << num(sy(fl, lr) + 4) << "\" text-anchor=\"end\">"
        << tick_label(fl) << "</text>\n";
    if (has_right) {
      const double fr = rr.lo + (rr.hi - rr.lo) * i / 5.0;
      svg << "<text x=\"" << num(L + pw + 6) << "\" y=\"" << num(sy(fr, rr) + 4) << "\" text-anchor=\"start\">"
          << tick_label(fr) << "</text>\n";
    }
  }
  svg << "<text x=\"" << num(L + pw / 2) << "\" y=\"" << num(T + ph + 34) << "\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << num(T + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(left_label) << "</text>\n";
  if (has_right) {
    svg << "<text transform=\"translate(" << num(W - 14) << "," << num(T + ph / 2)
        << ") rotate(90)\" text-anchor=\"middle\">" << escape_xml(right_label) << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    const Range& r = s.right_axis ? rr : lr;
    if (!s.points.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\""
          << (s.right_axis ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
      for (std::size_t p = 0; p < s.points.size(); ++p) {
        svg << (p ? " " : "") << num(sx(s.points[p].first)) << "," << num(sy(s.points[p].second, r));
      }
      svg << "\"/>\n";
    }
    const double lx = L + (i % 3) * 220.0;
    const double ly = T + ph + 54 + (i / 3) * 16.0;
    svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24) << "\" y2=\"" << num(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (s.right_axis ? " stroke-dasharray=\"5,3\"" : "")
        << "/>";
    svg << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">" << escape_xml(s.name)
        << (s.right_axis ? " (right)" : "") << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> units_of(const exp::ExperimentOutput& out) {
  std::vector<std::string> units;
  for (const auto& r : out.results) {
    if (std::find(units.begin(), units.end(), r.unit) == units.end()) units.push_back(r.unit);
  }
  return units;
}

std::string suffix(const std::string& unit, bool many) { return many ? " [" + unit + "]" : std::string(); }

}  // namespace

std::string format_value(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string results_csv(const std::vector<exp::ExperimentOutput>& outputs) {
  std::ostringstream out;
  for (std::size_t j = 0; j < kResultsColumns.size(); ++j) out << (j ? "," : "") << kResultsColumns[j];
  out << "\n";
  auto emit = [&](const std::vector<std::string>& f) {
    for (std::size_t j = 0; j < f.size(); ++j) out << (j ? "," : "") << csv_field(f[j]);
    out << "\n";
  };
  for (const auto& o : outputs) {
    std::vector<const exp::WindowResult*> rows;
    for (const auto& r : o.results) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
      return a->unit != b->unit ? a->unit < b->unit : a->window_start < b->window_start;
    });
    for (const auto* r : rows) {
      std::vector<std::string> f = {o.name,
                                    r->unit,
                                    "all",
                                    std::to_string(r->window_start),
                                    std::to_string(r->window_end),
                                    std::to_string(r->test_period),
                                    std::to_string(r->train_size),
                                    r->status,
                                    opt(r->auc_overall)};
      const bool gaps = r->fairness && r->fairness->shift_gaps;
      f.push_back(r->fairness ? opt(r->fairness->auc_gap) : "");
      f.push_back(gaps ? format_value(r->fairness->shift_gaps->delta) : "");
      f.push_back(gaps ? format_value(r->fairness->shift_gaps->theta) : "");
      f.insert(f.end(), {"", "", "", ""});
      shift_fields(f, r->shift);
      emit(f);

      for (const auto& key : o.plan.groups) {
        std::vector<std::string> g = {o.name,
                                      r->unit,
                                      key.label(),
                                      std::to_string(r->window_start),
                                      std::to_string(r->window_end),
                                      std::to_string(r->test_period),
                                      std::to_string(r->train_size),
                                      r->status};
        const learn::SubgroupAuc* sa = nullptr;
        if (r->fairness) {
          for (const auto& s : r->fairness->subgroups) {
            if (s.key == key) sa = &s;
          }
        }
        g.push_back(sa ? opt(sa->value) : "");
        g.insert(g.end(), {"", "", ""});
        g.push_back(sa ? std::to_string(sa->support) : "");
        g.push_back(sa ? std::to_string(sa->positives) : "");
        g.push_back(sa ? std::to_string(sa->negatives) : "");
        g.push_back(sa ? (sa->qualifies ? "1" : "0") : "");
        const exp::GroupShift* gs = nullptr;
        for (const auto& s : r->per_group_shift) {
          if (s.key == key) gs = &s;
        }
        if (gs && gs->report) {
          shift_fields(g, *gs->report);
        } else {
          g.insert(g.end(), 8, "");
        }
        emit(g);
      }
    }
  }
  return out.str();
}

nlohmann::json fit_to_json(const learn::RegressionFit& fit) {
  json terms = json::array();
  for (std::size_t i = 0; i < fit.terms.size(); ++i) {
    const auto k = static_cast<Index>(i);
    terms.push_back({{"term", fit.terms[i]},
                     {"estimate", nullable(fit.coefficients[k])},
                     {"std_error", nullable(fit.standard_errors[k])},
                     {"t_value", nullable(fit.t_values[k])},
                     {"p_value", nullable(fit.p_values[k])}});
  }
  return {{"terms", terms},
          {"r_squared", nullable(fit.r_squared)},
          {"n_obs", fit.n_obs},
          {"df_residual", fit.df_residual},
          {"dropped", fit.dropped}};
}

nlohmann::json fits_json(const std::vector<exp::ExperimentOutput>& outputs) {
  json j = json::object();
  for (const auto& o : outputs) {
    json e = json::object();
    for (const auto& [name, fit] : o.fits) e[name] = fit_to_json(fit);
    j[o.name] = {{"fits", e}, {"concept_measure", std::string(exp::to_string(o.plan.concept_measure))},
                 {"warnings", o.warnings}};
  }
  return j;
}

std::string fits_text(const std::vector<exp::ExperimentOutput>& outputs) {
  std::ostringstream out;
  char line[160];
  for (const auto& o : outputs) {
    out << "== " << o.name << " (concept measure: " << exp::to_string(o.plan.concept_measure) << ")\n";
    if (o.fits.empty()) out << "no fits\n";
    for (const auto& [name, fit] : o.fits) {
      out << "-- " << name << ": n = " << fit.n_obs << ", df = " << fit.df_residual
          << ", R^2 = " << format_value(fit.r_squared) << "\n";
      std::snprintf(line, sizeof line, "%-28s %12s %12s %10s %12s\n", "term", "estimate", "std.error", "t", "p");
      out << line;
      for (std::size_t i = 0; i < fit.terms.size(); ++i) {
        const auto k = static_cast<Index>(i);
        std::snprintf(line, sizeof line, "%-28s %12.6g %12.6g %10.4g %12.4g\n", fit.terms[i].c_str(),
                      fit.coefficients[k], fit.standard_errors[k], fit.t_values[k], fit.p_values[k]);
        out << line;
      }
      for (const auto& d : fit.dropped) out << "dropped (collinear): " << d << "\n";
    }
    for (const auto& w : o.warnings) out << "warning: " << w << "\n";
    out << "\n";
  }
  return out.str();
}

nlohmann::json manifest_json(const std::vector<exp::ExperimentOutput>& outputs,
                             const std::vector<nlohmann::json>& configs, const nlohmann::json& extra) {
  json j = extra.is_object() ? extra : json::object();
  json experiments = json::array();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& o = outputs[i];
    json windows = json::array();
    for (const auto& r : o.results) {
      json w{{"unit", r.unit},
             {"window_start", r.window_start},
             {"window_end", r.window_end},
             {"test_period", r.test_period},
             {"train_size", r.train_size},
             {"status", r.status},
             {"k", r.shift.k},
             {"d_pca", r.shift.d_pca},
             {"logistic_iterations", r.logistic_iterations},
             {"warnings", r.shift.warnings}};
      json groups = json::array();
      for (const auto& g : r.per_group_shift) {
        json e{{"group", g.key.label()}};
        if (g.report) {
          e["k"] = g.report->k;
          e["d_pca"] = g.report->d_pca;
        } else {
          e["note"] = g.note;
        }
        groups.push_back(e);
      }
      if (!groups.empty()) w["groups"] = groups;
      windows.push_back(w);
    }
    json e{{"name", o.name}, {"windows", windows}, {"warnings", o.warnings}};
    if (i < configs.size()) e["config"] = configs[i];
    experiments.push_back(e);
  }
  j["experiments"] = experiments;
  return j;
}

std::vector<std::pair<std::string, std::string>> render_charts(const exp::ExperimentOutput& o) {
  std::vector<std::pair<std::string, std::string>> charts;
  const auto units = units_of(o);
  const bool many = units.size() > 1;
  const std::string stem = file_stem(o.name);

  std::vector<Series> perf;
  for (const auto& u : units) {
    Series auc{"AUC" + suffix(u, many), {}, false};
    Series cov{"covariate shift" + suffix(u, many), {}, true};
    Series raw{"concept shift (kNN raw)" + suffix(u, many), {}, true};
    Series resid{"concept shift (residualized)" + suffix(u, many), {}, true};
    Series oracle{"concept shift (oracle)" + suffix(u, many), {}, true};
    for (const auto& r : o.results) {
      if (r.unit != u) continue;
      const double x = r.window_start;
      if (r.auc_overall) auc.points.emplace_back(x, *r.auc_overall);
      cov.points.emplace_back(x, r.shift.cov_unified);
      if (r.shift.concept_raw) raw.points.emplace_back(x, *r.shift.concept_raw);
      if (r.shift.concept_resid) resid.points.emplace_back(x, *r.shift.concept_resid);
      if (r.shift.concept_oracle) oracle.points.emplace_back(x, *r.shift.concept_oracle);
    }
    for (auto* s : {&auc, &cov, &oracle, &raw, &resid}) {
      if (!s->points.empty()) perf.push_back(std::move(*s));
    }
  }
  charts.emplace_back(stem + "_performance.svg",
                      line_chart(o.name + ": AUC and shift by window start", "training window start period", "AUC",
                                 "shift score", perf));

  if (o.plan.groups.empty()) return charts;
  std::vector<Series> fair, gshift;
  for (const auto& u : units) {
    Series gap{"AUC gap" + suffix(u, many), {}, true};
    std::map<SubgroupKey, Series> by_group, cov_by_group, con_by_group;
    for (const auto& r : o.results) {
      if (r.unit != u) continue;
      const double x = r.window_start;
      if (r.fairness) {
        if (r.fairness->auc_gap) gap.points.emplace_back(x, *r.fairness->auc_gap);
        for (const auto& s : r.fairness->subgroups) {
          if (!s.value) continue;
          auto& series = by_group[s.key];
          series.name = "AUC " + s.key.label() + suffix(u, many);
          series.points.emplace_back(x, *s.value);
        }
      }
      for (const auto& g : r.per_group_shift) {
        if (!g.report) continue;
        auto& c = cov_by_group[g.key];
        c.name = "covariate " + g.key.label() + suffix(u, many);
        c.points.emplace_back(x, g.report->cov_unified);
        if (auto v = exp::concept_value(*g.report, o.plan.concept_measure)) {
          auto& t = con_by_group[g.key];
          t.name = "concept (" + std::string(exp::to_string(o.plan.concept_measure)) + ") " + g.key.label() +
                   suffix(u, many);
          t.right_axis = true;
          t.points.emplace_back(x, *v);
        }
      }
    }
    for (auto& [k, s] : by_group) fair.push_back(std::move(s));
    if (!gap.points.empty()) fair.push_back(std::move(gap));
    for (auto& [k, s] : cov_by_group) gshift.push_back(std::move(s));
    for (auto& [k, s] : con_by_group) gshift.push_back(std::move(s));
  }
  charts.emplace_back(stem + "_fairness.svg", line_chart(o.name + ": subgroup AUC and AUC gap by window start",
                                                         "training window start period", "subgroup AUC",
                                                         "AUC gap", fair));
  charts.emplace_back(stem + "_group_shift.svg",
                      line_chart(o.name + ": subgroup shift by window start", "training window start period",
                                 "covariate shift", "concept shift", gshift));
  return charts;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  out.close();
  if (!out) throw IoError(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> emit_outputs(const std::vector<exp::ExperimentOutput>& outputs,
                                      const nlohmann::json& manifest, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir + ": cannot create directory: " + ec.message());
  const fs::path dir(out_dir);
  std::vector<std::string> files;
  auto write = [&](const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    files.push_back(name);
  };
  write("results.csv", results_csv(outputs));
  write("fits.json", fits_json(outputs).dump(2) + "\n");
  write("fits.txt", fits_text(outputs));
  for (const auto& o : outputs) {
    for (const auto& [name, svg] : render_charts(o)) write(name, svg);
  }
  if (!manifest.is_null()) {
    json m = manifest;
    m["files"] = files;
    write("manifest.json", m.dump(2) + "\n");
  }
  return files;
}

std::vector<exp::ExperimentOutput> read_results_csv(std::string_view text,
                                                    const std::map<std::string, exp::ExperimentPlan>& plans,
                                                    const exp::ExperimentPlan& fallback) {
  const auto records = parse_csv(text);
  if (records.empty()) throw SchemaError("results.csv: empty file");
  const auto& header = records.front();
  if (header.size() != kResultsColumns.size() ||
      !std::equal(header.begin(), header.end(), kResultsColumns.begin())) {
    throw SchemaError("results.csv: header does not match the results format");
  }
  std::map<std::string_view, std::size_t> col;
  for (std::size_t j = 0; j < kResultsColumns.size(); ++j) col[kResultsColumns[j]] = j;

  std::vector<exp::ExperimentOutput> outputs;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    const std::string where = "results.csv: line " + std::to_string(r + 1);
    if (rec.size() != header.size()) throw SchemaError(where + ": wrong field count");
    auto get = [&](std::string_view name) -> const std::string& { return rec[col.at(name)]; };
    auto number = [&](std::string_view name) -> std::optional<double> {
      const std::string& s = get(name);
      if (s.empty()) return std::nullopt;
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw SchemaError(where + ", column '" + std::string(name) + "': '" + s + "' is not a number");
      }
    };
    auto integer = [&](std::string_view name) { return static_cast<long long>(number(name).value_or(0.0)); };

    const std::string& name = get("experiment");
    auto it = index.find(name);
    if (it == index.end()) {
      exp::ExperimentOutput o;
      o.name = name;
      auto p = plans.find(name);
      o.plan = p != plans.end() ? p->second : fallback;
      o.plan.name = name;
      it = index.emplace(name, outputs.size()).first;
      outputs.push_back(std::move(o));
    }
    auto& out = outputs[it->second];

    metrics::ShiftReport shift;
    const bool has_shift = !get("cov_unified").empty();
    if (has_shift) {
      shift.cov_cont = number("cov_cont").value_or(0.0);
      shift.cov_bin = number("cov_bin").value_or(0.0);
      shift.cov_unified = *number("cov_unified");
      shift.concept_raw = number("concept_raw");
      shift.concept_resid = number("concept_resid");
      shift.concept_oracle = number("concept_oracle");
      shift.d_pca = static_cast<int>(integer("d_pca"));
      shift.k = static_cast<int>(integer("k"));
    }

    const std::string& scope = get("scope");
    if (scope == "all") {
      exp::WindowResult w;
      w.unit = get("unit");
      w.window_start = static_cast<int>(integer("window_start"));
      w.window_end = static_cast<int>(integer("window_end"));
      w.test_period = static_cast<int>(integer("test_period"));
      w.train_size = static_cast<std::size_t>(integer("train_size"));
      w.status = get("status");
      w.auc_overall = number("auc");
      w.shift = shift;
      if (!out.plan.groups.empty() || number("auc_gap")) {
        w.fairness = learn::FairnessRecord{};
        w.fairness->auc_gap = number("auc_gap");
        if (auto d = number("delta_cov"); d) w.fairness->shift_gaps = learn::GroupShiftGaps{*d, number("theta").value_or(0.0)};
      }
      out.results.push_back(std::move(w));
      continue;
    }
    if (out.results.empty()) throw SchemaError(where + ": subgroup row before its window row");
    auto& w = out.results.back();
    const SubgroupKey key = SubgroupKey::parse(scope);
    if (std::find(out.plan.groups.begin(), out.plan.groups.end(), key) == out.plan.groups.end()) {
      out.plan.groups.push_back(key);
    }
    if (!w.fairness) w.fairness = learn::FairnessRecord{};
    if (!get("support").empty()) {
      learn::SubgroupAuc sa;
      sa.key = key;
      sa.support = static_cast<std::size_t>(integer("support"));
      sa.positives = static_cast<std::size_t>(integer("positives"));
      sa.negatives = static_cast<std::size_t>(integer("negatives"));
      sa.qualifies = get("qualifies") == "1";
      sa.value = number("auc");
      w.fairness->subgroups.push_back(sa);
    }
    exp::GroupShift gs;
    gs.key = key;
    if (has_shift) gs.report = shift;
    w.per_group_shift.push_back(std::move(gs));
  }
  return outputs;
}

}  // namespace driftwin::io
