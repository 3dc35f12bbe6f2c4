#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dpbf {

struct Hash128 {
  std::uint64_t low;
  std::uint64_t high;
};

// MurmurHash3 x64_128 with a 64-bit seed (the reference takes 32 bits; the
// high half of the seed is folded into h2 so every seed bit matters).
Hash128 Murmur3_128(std::span<const std::byte> data, std::uint64_t seed) noexcept;

// Hashes the 8-byte little-endian encoding of an id.
Hash128 HashId(std::uint64_t id, std::uint64_t seed) noexcept;

}  // namespace dpbf
