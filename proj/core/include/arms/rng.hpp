#pragma once

#include <cstdint>
#include <random>

namespace arms {

/// splitmix64 finalizer; derives independent per-episode seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Seeded random source with platform-independent sampling.
///
/// The engine is std::mt19937_64 (fully specified by the standard); the
/// transforms to uniform/normal variates are done here rather than through
/// the std distributions, whose algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in the closed range [lo, hi].
  int uniform_int(int lo, int hi);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal variate (Box-Muller, caches the second value).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace arms
