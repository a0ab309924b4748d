#pragma once

#include <cstdint>
#include <random>

namespace nlsolve {

/// SplitMix64 step; used to derive well-mixed seeds for independent streams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seedable, splittable generator with a platform-independent output sequence.
/// Uses mt19937_64 (fully specified by the standard) and converts to doubles by hand,
/// since std::uniform_real_distribution is implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : split_state_(seed) {
    std::uint64_t s = seed;
    engine_.seed(splitmix64(s));
    split_state_ = s;
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Independent child stream; deterministic in the parent's seed and split count.
  Rng split() { return Rng(splitmix64(split_state_)); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t split_state_;
};

}  // namespace nlsolve
