#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "driftwin/core/dataset.hpp"
#include "driftwin/core/rng.hpp"
#include "driftwin/sim/scenario.hpp"

namespace driftwin::testing {

inline std::vector<double> random_vector(RngStream& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Values on a coarse grid so ties are common.
inline std::vector<double> tied_vector(RngStream& rng, std::size_t n, int levels) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
  return v;
}

inline std::vector<double> random_labels(RngStream& rng, std::size_t n, double p = 0.5) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.bernoulli(p) ? 1.0 : 0.0;
  return v;
}

inline Eigen::MatrixXd normal_matrix(RngStream& rng, Index rows, Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::MatrixXd bernoulli_matrix(RngStream& rng, Index rows, Index cols, double p = 0.5) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
  }
  return m;
}

// Random period with `n_cont` normal columns, `n_bin` binary columns and the
// given group columns appended to the binary block.
inline PeriodDataset random_period(RngStream& rng, int period, Index rows, int n_cont, int n_bin,
                                   const std::vector<std::string>& groups = {}) {
  FeatureSchema schema;
  for (int j = 0; j < n_cont; ++j) schema.continuous.push_back("x" + std::to_string(j + 1));
  for (int j = 0; j < n_bin; ++j) schema.binary.push_back("b" + std::to_string(j + 1));
  for (const auto& g : groups) {
    schema.binary.push_back(g);
    schema.groups.push_back(g);
  }
  const auto nb = static_cast<Index>(schema.binary.size());
  Eigen::VectorXd y(rows);
  for (Index i = 0; i < rows; ++i) y[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
  return PeriodDataset(period, schema, normal_matrix(rng, rows, n_cont), bernoulli_matrix(rng, rows, nb), y);
}

// Scenario with the default parameter draws at a reduced size.
inline sim::ShiftScenarioConfig small_scenario(sim::Scenario tag, std::uint64_t seed, int periods, int n,
                                               sim::ShiftKind kind = sim::ShiftKind::Concept, bool opposed = false) {
  sim::ScenarioDefaults d;
  d.periods = periods;
  d.n_per_period = n;
  d.single_group_kind = kind;
  d.opposed = opposed;
  return sim::default_scenario(tag, seed, d);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = (static_cast<double>(i + j) / 2.0) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace driftwin::testing
