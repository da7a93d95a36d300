#pragma once

#include <cstdint>

#include "smartmixed/matrix.hpp"

namespace smartmixed {

/// Counter-based generator: output i is a pure function of (seed, i), so
/// streams replay exactly regardless of platform, and child streams can be
/// carved off by key without consuming state from the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    // splitmix64 with an explicit counter as the walked state
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 bits of resolution.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Independent reproducible stream derived from this generator's seed
  /// and the given key; does not advance this generator.
  Rng child(std::uint64_t stream_id) const {
    std::uint64_t z = seed_ ^ (stream_id + 0x9E3779B97F4A7C15ULL) *
                                  0xD1B54A32D192ED03ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// n uniform draws in [0, 1); advances the generator.
Vector rng_uniform(Rng& rng, std::size_t n);

/// In-place Fisher-Yates shuffle of 0..n-1 indices.
std::vector<std::size_t> rng_permutation(Rng& rng, std::size_t n);

/// Stable 64-bit hash of a byte string, for deriving stream keys from names.
std::uint64_t fnv1a64(const char* s);

}  // namespace smartmixed
