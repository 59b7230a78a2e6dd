#pragma once

#include <cmath>
#include <cstdint>

namespace tailclust {

inline constexpr std::uint64_t kDefaultSeed = 42;

// SplitMix64 finalizer. Bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator: draw i of stream (seed, stream) is a pure function
// of (seed, stream, i). Samplers give each row its own stream, which makes
// output independent of evaluation order and therefore of the thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream + 0x6a09e667f3bcc909ULL))) {}

  std::uint64_t next_u64() { return mix64(key_ + (ctr_++) * kGamma); }

  // Uniform on [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0,1).
  double next_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard exponential via inversion; strictly positive and finite.
  double next_exp() { return -std::log(next_open()); }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace tailclust
