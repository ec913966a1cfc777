#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace sidnn {

/// Deterministic random source. The raw 64-bit stream comes from
/// std::mt19937_64, whose output sequence is fixed by the standard; every
/// derived distribution is implemented here rather than through the
/// implementation-defined <random> distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform in [lo, hi].
  double uniform(double lo, double hi);

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller; pairs are cached.
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// Derives an independent stream seed from (seed, stream) with splitmix64.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sidnn
