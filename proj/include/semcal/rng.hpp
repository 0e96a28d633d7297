#pragma once

#include <cstdint>
#include <random>

namespace semcal {

/// Deterministic seed for an independent sub-stream (SplitMix64 mix), so
/// concurrent consumers never share or reorder a common stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// mt19937_64-backed generator with explicit uniform/normal mappings;
/// identical seeds give identical streams regardless of standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  double normal(double mean, double sigma);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace semcal
