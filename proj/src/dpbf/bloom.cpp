#include "dpbf/bloom.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "dpbf/error.hpp"
#include "dpbf/hash.hpp"

namespace dpbf {
namespace {

// Keeps (h1 + i*h2) mod m exact in 64-bit arithmetic and allocations sane.
constexpr double kMaxBits = 4611686018427387904.0;  // 2^62

void CheckRate(double f) {
  if (!(f > 0.0 && f < 1.0)) Fail(ErrorCode::kInvalidParameter, "target fpr must lie in (0, 1), got " + std::to_string(f));
}

void CheckHashes(std::uint32_t k) {
  if (k < 1) Fail(ErrorCode::kInvalidParameter, "hash count must be >= 1");
}

// -ln(1 - f^(1/k)), positive for f in (0, 1).
double LogTerm(std::uint32_t k, double f) { return -std::log1p(-std::pow(f, 1.0 / static_cast<double>(k))); }

}  // namespace

std::uint64_t SizeFor(std::uint64_t n, std::uint32_t k, double f) {
  if (n < 1) Fail(ErrorCode::kInvalidParameter, "element count must be >= 1");
  CheckHashes(k);
  CheckRate(f);
  const double raw = std::ceil(static_cast<double>(n) * static_cast<double>(k) / LogTerm(k, f));
  if (!(raw < kMaxBits)) Fail(ErrorCode::kOverflow, "bit array size exceeds the addressable limit");
  return static_cast<std::uint64_t>(raw);
}

std::uint64_t PopulationFor(std::uint64_t m, std::uint32_t k, double f) {
  if (m < 1) Fail(ErrorCode::kInvalidParameter, "bit count must be >= 1");
  CheckHashes(k);
  CheckRate(f);
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(m) / static_cast<double>(k) * LogTerm(k, f)));
}

double EstimatedFpr(std::uint64_t n, std::uint64_t m, std::uint32_t k) {
  if (m < 1) Fail(ErrorCode::kInvalidParameter, "bit count must be >= 1");
  CheckHashes(k);
  if (n == 0) return 0.0;
  // Extended precision: 1 - e^{-x} cancels badly for small x.
  const long double x = static_cast<long double>(n) * k / static_cast<long double>(m);
  const long double per_probe = -std::expm1(-x);
  return static_cast<double>(std::pow(per_probe, static_cast<long double>(k)));
}

FilterParams FilterParams::Make(std::uint64_t universe_size, std::uint32_t depth, std::uint32_t hash_count,
                                double target_fpr, std::uint64_t hash_seed) {
  if (depth > 62) Fail(ErrorCode::kInvalidParameter, "depth must be <= 62");
  CheckHashes(hash_count);
  if (hash_count > 255) Fail(ErrorCode::kInvalidParameter, "hash count must be <= 255");
  CheckRate(target_fpr);
  if (universe_size < 1) Fail(ErrorCode::kInvalidParameter, "universe size must be >= 1");
  const std::uint64_t leaves = std::uint64_t{1} << depth;
  std::uint64_t padded = universe_size;
  if (const std::uint64_t rem = universe_size % leaves; rem != 0) {
    if (universe_size > std::numeric_limits<std::uint64_t>::max() - (leaves - rem)) {
      Fail(ErrorCode::kOverflow, "padded universe size overflows 64 bits");
    }
    padded += leaves - rem;
  }
  FilterParams p;
  p.universe_size = padded;
  p.depth = depth;
  p.hash_count = hash_count;
  p.target_fpr = target_fpr;
  p.target_population = padded / leaves;
  p.bits_per_filter = SizeFor(p.target_population, hash_count, target_fpr);
  p.hash_seed = hash_seed;
  return p;
}

ProbeHash ProbeHash::Of(std::uint64_t element, std::uint64_t seed) noexcept {
  const Hash128 h = HashId(element, seed);
  return {h.low, h.high | 1U};
}

std::vector<std::uint64_t> ProbePositions(std::uint64_t element, const BloomShape& shape) {
  const ProbeHash h = ProbeHash::Of(element, shape.seed);
  std::vector<std::uint64_t> out;
  out.reserve(shape.hashes);
  const std::uint64_t step = h.h2 % shape.bits;
  std::uint64_t pos = h.h1 % shape.bits;
  for (std::uint32_t i = 0; i < shape.hashes; ++i) {
    out.push_back(pos);
    pos += step;
    if (pos >= shape.bits) pos -= shape.bits;
  }
  return out;
}

UnitBloomFilter::UnitBloomFilter(const BloomShape& shape) : shape_(shape) {
  if (shape.bits < 1) Fail(ErrorCode::kInvalidParameter, "filter needs at least one bit");
  CheckHashes(shape.hashes);
  words_.assign((shape.bits + 63) / 64, 0);
}

void UnitBloomFilter::Insert(const ProbeHash& hash) noexcept {
  const std::uint64_t m = shape_.bits;
  const std::uint64_t step = hash.h2 % m;
  std::uint64_t pos = hash.h1 % m;
  for (std::uint32_t i = 0; i < shape_.hashes; ++i) {
    words_[pos >> 6] |= std::uint64_t{1} << (pos & 63);
    pos += step;
    if (pos >= m) pos -= m;
  }
}

bool UnitBloomFilter::Query(const ProbeHash& hash) const noexcept {
  const std::uint64_t m = shape_.bits;
  const std::uint64_t step = hash.h2 % m;
  std::uint64_t pos = hash.h1 % m;
  for (std::uint32_t i = 0; i < shape_.hashes; ++i) {
    if (((words_[pos >> 6] >> (pos & 63)) & 1U) == 0) return false;
    pos += step;
    if (pos >= m) pos -= m;
  }
  return true;
}

void UnitBloomFilter::OrWith(const UnitBloomFilter& other) {
  if (!(shape_ == other.shape_)) Fail(ErrorCode::kParamMismatch, "cannot merge filters of different shape");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

void UnitBloomFilter::AndWith(const UnitBloomFilter& other) {
  if (!(shape_ == other.shape_)) Fail(ErrorCode::kParamMismatch, "cannot merge filters of different shape");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
}

std::uint64_t UnitBloomFilter::popcount() const noexcept {
  std::uint64_t total = 0;
  for (const std::uint64_t w : words_) total += static_cast<std::uint64_t>(std::popcount(w));
  return total;
}

std::vector<std::uint8_t> UnitBloomFilter::ToBytes() const {
  std::vector<std::uint8_t> out((shape_.bits + 7) / 8);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  return out;
}

UnitBloomFilter UnitBloomFilter::FromBytes(const BloomShape& shape, std::span<const std::uint8_t> bytes) {
  UnitBloomFilter f(shape);
  if (bytes.size() != (shape.bits + 7) / 8) Fail(ErrorCode::kCorruptPayload, "bit array has the wrong length");
  for (std::size_t i = 0; i < bytes.size(); ++i) f.words_[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
  if (const std::uint64_t tail = shape.bits % 64; tail != 0 && (f.words_.back() >> tail) != 0) {
    Fail(ErrorCode::kCorruptPayload, "bits set beyond the filter width");
  }
  return f;
}

UnitBloomFilter MergeOr(const UnitBloomFilter& a, const UnitBloomFilter& b) {
  UnitBloomFilter out = a;
  out.OrWith(b);
  return out;
}

UnitBloomFilter MergeAnd(const UnitBloomFilter& a, const UnitBloomFilter& b) {
  UnitBloomFilter out = a;
  out.AndWith(b);
  return out;
}

}  // namespace dpbf
