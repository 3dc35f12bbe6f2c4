#pragma once

#include <cstdint>

namespace dpbf {

// SplitMix64 (Steele, Lea & Flood, 2014). Split() derives an independent
// stream so sub-tasks of one seeded run stay reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t Next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t Below(std::uint64_t bound) noexcept {
    __uint128_t m = static_cast<__uint128_t>(Next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        m = static_cast<__uint128_t>(Next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  SplitMix64 Split() noexcept { return SplitMix64(Next()); }

 private:
  std::uint64_t state_;
};

}  // namespace dpbf
