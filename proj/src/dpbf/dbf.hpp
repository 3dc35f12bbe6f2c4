#pragma once

#include <cstdint>
#include <vector>

#include "dpbf/bloom.hpp"

namespace dpbf {

// 1 - (1 - f_t)^floor(set_size / n_t): the least false-positive rate a
// dynamic Bloom filter holding set_size elements can have.
double FprLowerBound(std::uint64_t set_size, std::uint64_t n_t, double f_t);

// Append-only list of homogeneous filters. Every filter but the last holds
// exactly n_t inserts; a fresh filter is appended on the insert after the last
// one fills up.
class Dbf {
 public:
  struct Unit {
    UnitBloomFilter ubf;
    std::uint64_t insert_count = 0;
  };

  // n_t = PopulationFor(shape.bits, shape.hashes, target_fpr); must be >= 1.
  Dbf(const BloomShape& shape, double target_fpr);
  // Same unit filters as a Dpbf built with params.
  static Dbf FromParams(const FilterParams& params) { return Dbf(params.shape(), params.target_fpr); }

  void Insert(std::uint64_t element);
  [[nodiscard]] bool Query(std::uint64_t element) const noexcept;

  // 1 - prod(1 - EstimatedFpr(count_i, m, k)) over the list.
  [[nodiscard]] double TheoreticalFpr() const;
  // EstimatedFpr(n_t, m, k): what each full unit contributes. <= target_fpr.
  [[nodiscard]] double UnitFpr() const noexcept { return unit_fpr_; }

  [[nodiscard]] std::uint64_t target_population() const noexcept { return n_t_; }
  [[nodiscard]] double target_fpr() const noexcept { return target_fpr_; }
  [[nodiscard]] const BloomShape& shape() const noexcept { return shape_; }
  [[nodiscard]] const std::vector<Unit>& units() const noexcept { return units_; }
  [[nodiscard]] std::uint64_t total_inserts() const noexcept { return total_inserts_; }
  [[nodiscard]] std::uint64_t total_bits() const noexcept { return units_.size() * shape_.bits; }

 private:
  BloomShape shape_;
  double target_fpr_;
  std::uint64_t n_t_;
  double unit_fpr_;
  std::vector<Unit> units_;
  std::uint64_t total_inserts_ = 0;
};

}  // namespace dpbf
