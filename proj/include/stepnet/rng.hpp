#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stepnet {

// SplitMix64 finalizer: full-avalanche mix of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based uniform generator. Every draw is keyed by (seed, counter),
/// so sample i can be produced independently of all others and a stream can
/// be partitioned across workers without changing a single value.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : base_(mix64(seed ^ 0x5D1E7A6B93C0FFEEull)) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(
               mix64(base_ + counter * 0x9E3779B97F4A7C15ull) >> 11) *
           0x1.0p-53;
  }

 private:
  std::uint64_t base_;
};

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

}  // namespace stepnet
