#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpbf {

// Bits per filter = ceil(-n*k / ln(1 - f^(1/k))), evaluated in binary64.
std::uint64_t SizeFor(std::uint64_t n, std::uint32_t k, double f);

// Largest population a filter of m bits holds at FPR <= f:
// floor(-(m/k) * ln(1 - f^(1/k))).
std::uint64_t PopulationFor(std::uint64_t m, std::uint32_t k, double f);

// Classic approximation (1 - e^{-nk/m})^k of the false-positive rate.
double EstimatedFpr(std::uint64_t n, std::uint64_t m, std::uint32_t k);

// Bit width, probe count and hash seed. Two filters can be merged iff their
// shapes compare equal.
struct BloomShape {
  std::uint64_t bits = 0;
  std::uint32_t hashes = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const BloomShape&, const BloomShape&) = default;
};

// Shared configuration of one homogeneous family of unit filters.
struct FilterParams {
  std::uint64_t universe_size = 0;
  std::uint32_t depth = 0;
  std::uint32_t hash_count = 0;
  double target_fpr = 0.0;
  std::uint64_t bits_per_filter = 0;
  std::uint64_t target_population = 0;
  std::uint64_t hash_seed = 0;

  // Rounds universe_size up to the next multiple of 2^depth.
  static FilterParams Make(std::uint64_t universe_size, std::uint32_t depth, std::uint32_t hash_count,
                           double target_fpr, std::uint64_t hash_seed);

  [[nodiscard]] BloomShape shape() const noexcept { return {bits_per_filter, hash_count, hash_seed}; }
  [[nodiscard]] std::uint64_t leaf_count() const noexcept { return std::uint64_t{1} << depth; }

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

// The double-hashing seed pair for one element. Computing it once lets a
// caller probe any number of filters sharing a BloomShape.
struct ProbeHash {
  std::uint64_t h1;
  std::uint64_t h2;  // always odd

  static ProbeHash Of(std::uint64_t element, std::uint64_t seed) noexcept;
};

// position_i = (h1 + i*h2) mod m for i in [0, k).
std::vector<std::uint64_t> ProbePositions(std::uint64_t element, const BloomShape& shape);

class UnitBloomFilter {
 public:
  explicit UnitBloomFilter(const BloomShape& shape);

  void Insert(std::uint64_t element) noexcept { Insert(ProbeHash::Of(element, shape_.seed)); }
  void Insert(const ProbeHash& hash) noexcept;
  [[nodiscard]] bool Query(std::uint64_t element) const noexcept { return Query(ProbeHash::Of(element, shape_.seed)); }
  [[nodiscard]] bool Query(const ProbeHash& hash) const noexcept;

  // In-place union/intersection. Throw kParamMismatch on differing shapes.
  void OrWith(const UnitBloomFilter& other);
  void AndWith(const UnitBloomFilter& other);

  [[nodiscard]] const BloomShape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::uint64_t bit_count() const noexcept { return shape_.bits; }
  [[nodiscard]] bool test_bit(std::uint64_t bit) const noexcept { return (words_[bit >> 6] >> (bit & 63)) & 1U; }
  [[nodiscard]] std::uint64_t popcount() const noexcept;
  [[nodiscard]] bool empty() const noexcept { return popcount() == 0; }

  // Packed LSB-first: bit j lives in byte j/8 at position j%8; ceil(m/8) bytes.
  [[nodiscard]] std::vector<std::uint8_t> ToBytes() const;
  // Throws kCorruptPayload on a wrong length or set padding bits.
  static UnitBloomFilter FromBytes(const BloomShape& shape, std::span<const std::uint8_t> bytes);

  friend bool operator==(const UnitBloomFilter&, const UnitBloomFilter&) = default;

 private:
  BloomShape shape_;
  std::vector<std::uint64_t> words_;
};

UnitBloomFilter MergeOr(const UnitBloomFilter& a, const UnitBloomFilter& b);
UnitBloomFilter MergeAnd(const UnitBloomFilter& a, const UnitBloomFilter& b);

}  // namespace dpbf
