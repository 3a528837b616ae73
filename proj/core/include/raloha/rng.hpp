#pragma once

#include <cstdint>

namespace raloha {

/// Counter-based uniform generator built on the SplitMix64 finalizer.
///
/// Draw k of a stream with seed s is fully determined by (s, k):
///
///   state  = s + (k + 1) * 0x9E3779B97F4A7C15
///   z = state;  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27;  z *= 0x94D049BB133111EB;  z ^= z >> 31;
///
/// uniform01 maps the top 53 bits of z to [0, 1).  Any draw can be taken in
/// any order, which keeps noise streams reproducible across
/// reimplementations and independent of pixel traversal order.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  double uniform01(std::uint64_t counter) const {
    return double(bits(counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
};

}  // namespace raloha
