#include "dpbf/dbf.hpp"

#include <cmath>

#include "dpbf/error.hpp"

namespace dpbf {

double FprLowerBound(std::uint64_t set_size, std::uint64_t n_t, double f_t) {
  if (n_t < 1) Fail(ErrorCode::kInvalidParameter, "target population must be >= 1");
  if (!(f_t >= 0.0 && f_t <= 1.0)) Fail(ErrorCode::kInvalidParameter, "rate must lie in [0, 1]");
  const auto full = static_cast<long double>(set_size / n_t);
  if (full == 0) return 0.0;
  return static_cast<double>(-std::expm1(full * std::log1p(-static_cast<long double>(f_t))));
}

Dbf::Dbf(const BloomShape& shape, double target_fpr)
    : shape_(shape),
      target_fpr_(target_fpr),
      n_t_(PopulationFor(shape.bits, shape.hashes, target_fpr)),
      unit_fpr_(0.0) {
  if (n_t_ < 1) Fail(ErrorCode::kInvalidParameter, "unit filters too small to hold one element at this fpr");
  unit_fpr_ = EstimatedFpr(n_t_, shape_.bits, shape_.hashes);
}

void Dbf::Insert(std::uint64_t element) {
  if (units_.empty() || units_.back().insert_count == n_t_) units_.push_back({UnitBloomFilter(shape_), 0});
  units_.back().ubf.Insert(element);
  ++units_.back().insert_count;
  ++total_inserts_;
}

bool Dbf::Query(std::uint64_t element) const noexcept {
  // All units share one hash family, so the probe seed is computed once.
  const ProbeHash hash = ProbeHash::Of(element, shape_.seed);
  for (const Unit& u : units_) {
    if (u.ubf.Query(hash)) return true;
  }
  return false;
}

double Dbf::TheoreticalFpr() const {
  if (units_.empty()) return 0.0;
  // Same evaluation order as FprLowerBound so the bound comparison is exact.
  const auto full = static_cast<long double>(total_inserts_ / n_t_);
  long double log_keep = full == 0 ? 0.0L : full * std::log1p(-static_cast<long double>(unit_fpr_));
  if (const std::uint64_t tail = units_.back().insert_count; tail < n_t_) {
    log_keep += std::log1p(-static_cast<long double>(EstimatedFpr(tail, shape_.bits, shape_.hashes)));
  }
  return static_cast<double>(-std::expm1(log_keep));
}

}  // namespace dpbf
