#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace driftwin {

// Counter-based random stream addressed by (master_seed, path).
//
// The stream key is a SplitMix64 hash chain over the seed and every path
// element; draws are mix(key + counter * golden). Two streams with the same
// address produce identical sequences no matter which thread or in which
// order they are consumed, so parallel execution cannot change results.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path);
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
      : RngStream(master_seed, std::vector<std::uint64_t>(path)) {}

  // Stream at path + {index}; the parent's draw position is irrelevant.
  [[nodiscard]] RngStream child(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

 private:
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace driftwin
