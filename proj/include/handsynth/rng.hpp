#pragma once

#include <cstdint>

namespace handsynth {

/// Frozen portable 64-bit generator, recorded as "splitmix64-v1" in dataset
/// manifests. Both the stream generator and the seed-derivation function
/// below are part of the dataset reproducibility contract: they must not
/// change while format_version is 1.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi]; a degenerate range returns lo exactly.
  double next_in(double lo, double hi) { return lo + next_unit() * (hi - lo); }

 private:
  std::uint64_t state_;
};

/// SplitMix64 finalizer: bijective avalanche mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent derived streams per sample. `joints` feeds the configuration
/// draw, `appearance` the texture/material draw.
enum class SeedStream : std::uint64_t { joints = 1, appearance = 2 };

/// Derives the per-sample generator seed from (master_seed, sample_index,
/// stream). Pure, order-free, frozen under format_version 1.
constexpr std::uint64_t derive_sample_seed(std::uint64_t master_seed,
                                           std::uint64_t sample_index,
                                           SeedStream stream) {
  std::uint64_t h = mix64(master_seed + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ (sample_index + 0xBF58476D1CE4E5B9ULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(stream) * 0x94D049BB133111EBULL));
  return h;
}

}  // namespace handsynth
