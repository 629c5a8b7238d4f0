#pragma once

#include <bit>
#include <cstdint>
#include <cstring>

namespace fss {

// splitmix64: tiny, fully specified generator. Used everywhere randomness is
// needed so that runs are reproducible bit-for-bit on any platform
// (std::uniform_real_distribution and std::shuffle are implementation-defined).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform in [-1, 1).
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

  /// Uniform integer in [0, n); n > 0. Rejection-sampled, unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t hash_double(double v, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  return fnv1a64(&bits, sizeof bits, hash);
}

}  // namespace fss
