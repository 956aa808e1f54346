#include "driftwin/metrics/concept.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "driftwin/core/errors.hpp"
#include "driftwin/learn/logistic.hpp"

namespace driftwin::metrics {
namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

double binary_entropy(double p) { return -(xlog2x(p) + xlog2x(1.0 - p)); }

constexpr int kHistogramBins = 20;

}  // namespace

double js_bernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
    throw MetricError("js_bernoulli: probabilities must lie in [0, 1]");
  }
  const double m = 0.5 * (p + q);
  const double js = binary_entropy(m) - 0.5 * (binary_entropy(p) + binary_entropy(q));
  return std::clamp(js, 0.0, 1.0);
}

double js_discrete(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size() || p.size() == 0) throw MetricError("js_discrete: size mismatch");
  const Eigen::VectorXd pn = p / p.sum();
  const Eigen::VectorXd qn = q / q.sum();
  double js = 0.0;
  for (Index i = 0; i < pn.size(); ++i) {
    const double m = 0.5 * (pn[i] + qn[i]);
    if (pn[i] > 0.0) js += 0.5 * pn[i] * std::log2(pn[i] / m);
    if (qn[i] > 0.0) js += 0.5 * qn[i] * std::log2(qn[i] / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

double concept_shift_oracle(const Eigen::VectorXd& beta_train, const Eigen::VectorXd& beta_test,
                            const Eigen::MatrixXd& test_x) {
  if (beta_train.size() != beta_test.size() || beta_train.size() != test_x.cols() + 1) {
    throw SchemaError("oracle concept shift: coefficient length must be features + 1");
  }
  if (test_x.rows() == 0) throw MetricError("oracle concept shift: no test rows");
  const Index d = test_x.cols();
  const Eigen::VectorXd eta_train = (test_x * beta_train.tail(d)).array() + beta_train[0];
  const Eigen::VectorXd eta_test = (test_x * beta_test.tail(d)).array() + beta_test[0];
  double total = 0.0;
  for (Index i = 0; i < test_x.rows(); ++i) {
    total += js_bernoulli(learn::sigmoid(eta_train[i]), learn::sigmoid(eta_test[i]));
  }
  return total / static_cast<double>(test_x.rows());
}

namespace {

using Entry = std::pair<double, Index>;

constexpr Index kRefTile = 4;
constexpr Index kQueryTile = 64;
constexpr Index kQueryBlock = 256;

// Bit b is set when some key in column b lies below thr[b].
std::uint64_t candidate_mask(const float (&keys)[kRefTile][kQueryTile], const float* thr) {
  std::uint64_t mask = 0;
#if defined(__AVX512F__)
  for (Index g = 0; g < kQueryTile / 16; ++g) {
    const __m512 t = _mm512_loadu_ps(thr + 16 * g);
    __mmask16 m = 0;
    for (Index a = 0; a < kRefTile; ++a) m |= _mm512_cmp_ps_mask(_mm512_loadu_ps(&keys[a][16 * g]), t, _CMP_LT_OQ);
    mask |= static_cast<std::uint64_t>(m) << (16 * g);
  }
#else
  for (Index b = 0; b < kQueryTile; ++b) {
    bool below = false;
    for (Index a = 0; a < kRefTile; ++a) below |= keys[a][b] < thr[b];
    mask |= static_cast<std::uint64_t>(below) << b;
  }
#endif
  return mask;
}

// Keeps the k smallest (key, index) pairs; returns the largest kept key.
double keep_smallest(std::vector<Entry>& buf, std::size_t k) {
  std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k - 1), buf.end());
  const double kth = buf[k - 1].first;
  buf.resize(k);
  return kth;
}

}  // namespace

Eigen::VectorXd knn_conditional_estimate(const Eigen::MatrixXd& ref_x, const Eigen::VectorXd& ref_y,
                                         const Eigen::MatrixXd& query_x, int k) {
  const Index n_ref = ref_x.rows();
  if (k < 1 || k > n_ref) {
    throw MetricError("knn: k = " + std::to_string(k) + " outside [1, " + std::to_string(n_ref) + "]");
  }
  if (ref_y.size() != n_ref) throw SchemaError("knn: reference labels do not match reference rows");
  if (query_x.cols() != ref_x.cols()) throw SchemaError("knn: query and reference dimensions differ");

  // Ranking key ||r||^2 - 2 q.r equals ||q - r||^2 minus a per-query constant.
  // A single-precision register-tiled pass (the embedding is narrow, so a
  // general GEMM spends most of its time packing) filters candidates with a
  // margin covering its rounding error; survivors get exact double keys, so
  // the neighbor sets match an all-double computation. Each query appends
  // candidates below its threshold and is cut back to the k smallest
  // (key, index) pairs whenever the buffer reaches 2k.
  const Index d = ref_x.cols();
  const Index n_query = query_x.rows();
  const Index ref_rows = (n_ref + kRefTile - 1) / kRefTile * kRefTile;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat ref = ref_x;
  const RowMat query = query_x;
  std::vector<float> ref_f(static_cast<std::size_t>(ref_rows * d), 0.0f);
  std::vector<double> norms(static_cast<std::size_t>(ref_rows), kInf);
  std::vector<float> norms_f(static_cast<std::size_t>(ref_rows), std::numeric_limits<float>::infinity());
  double max_norm = 0.0;
  for (Index r = 0; r < n_ref; ++r) {
    double sq = 0.0;
    for (Index j = 0; j < d; ++j) {
      ref_f[static_cast<std::size_t>(r * d + j)] = static_cast<float>(ref(r, j));
      sq += ref(r, j) * ref(r, j);
    }
    norms[static_cast<std::size_t>(r)] = sq;
    norms_f[static_cast<std::size_t>(r)] = static_cast<float>(sq);
    max_norm = std::max(max_norm, sq);
  }
  const double max_len = std::sqrt(max_norm);
  // Bound on |float key - exact key|, with a factor 2 of slack.
  const double rel_err = 2.0 * static_cast<double>(d + 5) * std::ldexp(1.0, -24);

  auto exact_key = [&](Index r, Index q) {
    const double* rr = ref.data() + r * d;
    const double* qq = query.data() + q * d;
    double part[4] = {0.0, 0.0, 0.0, 0.0};
    Index j = 0;
    for (; j + 4 <= d; j += 4) {
      for (int u = 0; u < 4; ++u) part[u] += rr[j + u] * qq[j + u];
    }
    for (; j < d; ++j) part[0] += rr[j] * qq[j];
    return norms[static_cast<std::size_t>(r)] - 2.0 * ((part[0] + part[1]) + (part[2] + part[3]));
  };

  std::vector<std::vector<Entry>> candidates(kQueryBlock);
  std::vector<double> threshold(kQueryBlock);
  std::vector<double> margin(kQueryBlock);
  std::vector<float> threshold_f(kQueryBlock);
  std::vector<float> qt(static_cast<std::size_t>(d * kQueryBlock));
  Eigen::VectorXd estimate(n_query);
  const auto kk = static_cast<std::size_t>(k);

  auto set_threshold = [&](std::size_t q, double t) {
    threshold[q] = t;
    const double loose = t + margin[q];
    threshold_f[q] = loose >= static_cast<double>(std::numeric_limits<float>::max())
                         ? std::numeric_limits<float>::infinity()
                         : std::nextafter(static_cast<float>(loose), std::numeric_limits<float>::infinity());
  };

  for (Index q0 = 0; q0 < n_query; q0 += kQueryBlock) {
    const Index nq = std::min(kQueryBlock, n_query - q0);
    const Index nq_pad = (nq + kQueryTile - 1) / kQueryTile * kQueryTile;
    for (Index j = 0; j < d; ++j) {
      for (Index q = 0; q < nq_pad; ++q) {
        qt[static_cast<std::size_t>(j * kQueryBlock + q)] = q < nq ? static_cast<float>(query(q0 + q, j)) : 0.0f;
      }
    }
    for (Index q = 0; q < kQueryBlock; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      candidates[qi].clear();
      if (q < nq) {
        margin[qi] = rel_err * (max_norm + 2.0 * max_len * query.row(q0 + q).norm());
        set_threshold(qi, kInf);
      } else {
        // Padding queries never accept a candidate.
        threshold[qi] = -kInf;
        threshold_f[qi] = -std::numeric_limits<float>::infinity();
      }
    }

    for (Index r0 = 0; r0 < ref_rows; r0 += kRefTile) {
      const float* rt = ref_f.data() + r0 * d;
      for (Index t0 = 0; t0 < nq_pad; t0 += kQueryTile) {
        float acc[kRefTile][kQueryTile] = {};
        for (Index j = 0; j < d; ++j) {
          const float* qv = qt.data() + j * kQueryBlock + t0;
          for (Index a = 0; a < kRefTile; ++a) {
            const float rv = rt[a * d + j];
            for (Index b = 0; b < kQueryTile; ++b) acc[a][b] += rv * qv[b];
          }
        }
        for (Index a = 0; a < kRefTile; ++a) {
          const float n = norms_f[static_cast<std::size_t>(r0 + a)];
          for (Index b = 0; b < kQueryTile; ++b) acc[a][b] = n - 2.0f * acc[a][b];
        }
        std::uint64_t hit = candidate_mask(acc, threshold_f.data() + t0);
        while (hit) {
          const int b = std::countr_zero(hit);
          hit &= hit - 1;
          const auto q = static_cast<std::size_t>(t0 + b);
          auto& buf = candidates[q];
          // Reference rows in increasing order per query, so equal keys keep
          // the lower index.
          for (Index a = 0; a < kRefTile; ++a) {
            if (!(acc[a][b] < threshold_f[q]) || r0 + a >= n_ref) continue;
            const double key = exact_key(r0 + a, q0 + static_cast<Index>(q));
            if (!(key < threshold[q])) continue;
            buf.emplace_back(key, r0 + a);
            if (buf.size() == 2 * kk) set_threshold(q, keep_smallest(buf, kk));
          }
        }
      }
    }
    for (Index q = 0; q < nq; ++q) {
      auto& buf = candidates[static_cast<std::size_t>(q)];
      if (buf.size() > kk) keep_smallest(buf, kk);
      double sum = 0.0;
      for (const auto& e : buf) sum += ref_y[e.second];
      estimate[q0 + q] = sum / static_cast<double>(k);
    }
  }
  return estimate;
}

std::string_view to_string(KnnJsMode m) { return m == KnnJsMode::Pointwise ? "pointwise" : "histogram"; }

KnnJsMode parse_knn_js_mode(std::string_view text) {
  if (text == "pointwise") return KnnJsMode::Pointwise;
  if (text == "histogram") return KnnJsMode::Histogram;
  throw ConfigError("knn js mode: expected 'pointwise' or 'histogram', got '" + std::string(text) + "'");
}

int default_knn_k(Index n_train, Index n_test) {
  const auto root = static_cast<Index>(std::floor(std::sqrt(static_cast<double>(n_train))));
  const Index k = std::max<Index>(25, root);
  return static_cast<int>(std::min({k, n_train, n_test}));
}

Eigen::MatrixXd knn_embedding(const PeriodDataset& data, const std::optional<PcaBasis>& basis) {
  const Index c = basis ? basis->dims() : 0;
  Eigen::MatrixXd out(data.rows(), c + data.bin().cols());
  if (basis) out.leftCols(c) = basis->project(data.cont());
  out.rightCols(data.bin().cols()) = data.bin();
  return out;
}

double concept_shift_knn(const PeriodDataset& train, const PeriodDataset& test, int k,
                         const std::optional<PcaBasis>& basis, KnnJsMode mode) {
  if (!(train.schema() == test.schema())) throw SchemaError("knn concept shift: schemas differ");
  if (k < 1 || k > train.rows() || k > test.rows()) {
    throw MetricError("knn concept shift: k = " + std::to_string(k) + " exceeds available rows");
  }
  const Eigen::MatrixXd train_emb = knn_embedding(train, basis);
  const Eigen::MatrixXd test_emb = knn_embedding(test, basis);
  const Eigen::VectorXd p_train = knn_conditional_estimate(train_emb, train.labels(), test_emb, k);
  const Eigen::VectorXd p_test = knn_conditional_estimate(test_emb, test.labels(), test_emb, k);

  if (mode == KnnJsMode::Histogram) {
    Eigen::VectorXd h_train = Eigen::VectorXd::Zero(kHistogramBins);
    Eigen::VectorXd h_test = Eigen::VectorXd::Zero(kHistogramBins);
    auto bin_of = [](double p) { return std::min(kHistogramBins - 1, static_cast<int>(p * kHistogramBins)); };
    for (Index i = 0; i < p_train.size(); ++i) {
      h_train[bin_of(p_train[i])] += 1.0;
      h_test[bin_of(p_test[i])] += 1.0;
    }
    return js_discrete(h_train, h_test);
  }
  double total = 0.0;
  for (Index i = 0; i < p_train.size(); ++i) total += js_bernoulli(p_train[i], p_test[i]);
  return total / static_cast<double>(p_train.size());
}

}  // namespace driftwin::metrics
