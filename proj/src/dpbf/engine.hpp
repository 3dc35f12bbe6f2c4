#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dpbf/bloom.hpp"
#include "dpbf/partition.hpp"

namespace dpbf {

// One populated leaf-level filter: the elements of the stored set that fall in
// leaf namespace leaf_index.
struct PopulatedUnit {
  std::uint64_t leaf_index = 0;
  std::uint64_t insert_count = 0;  // >= 1, capped at the leaf namespace size
  UnitBloomFilter ubf;
};

// Ordered by leaf index so that the units under any tree node form one
// contiguous run.
using PuBFMap = std::map<std::uint64_t, PopulatedUnit>;

// Node of the compressed populated partition tree. A node is either a leaf
// (no children, count <= n_t, filter present iff count > 0) or internal (two
// children, count > n_t, count = left.count + right.count).
struct CpbptNode {
  NodeCoord coord;
  std::uint64_t count = 0;
  std::optional<UnitBloomFilter> ubf;
  std::unique_ptr<CpbptNode> left;
  std::unique_ptr<CpbptNode> right;

  [[nodiscard]] bool is_leaf() const noexcept { return left == nullptr; }
};

// Canonical tree for a map: every leaf covers <= n_t counted inserts while its
// parent covers more. Leaf filters are the OR of the spanned map filters.
std::unique_ptr<CpbptNode> Compress(const PuBFMap& map, const FilterParams& params);

// Exact structural equality: coordinates, counts, filter presence and bits.
bool SameTree(const CpbptNode& a, const CpbptNode& b);

struct LeafInfo {
  NodeCoord coord;
  std::uint64_t count = 0;
  bool populated = false;

  friend bool operator==(const LeafInfo&, const LeafInfo&) = default;
};

struct DpbfStats {
  std::uint64_t s = 0;                     // puBFMap entries
  std::uint64_t cpbpt_leaf_count = 0;      // all tree leaves
  std::uint64_t populated_leaf_count = 0;  // leaves holding a filter
  std::uint64_t internal_node_count = 0;
  std::uint64_t unit_filter_count = 0;     // s + populated leaves
  std::uint64_t total_bits = 0;            // unit_filter_count * m
  std::uint64_t inserted = 0;              // root count
  double estimated_fpr_max = 0.0;
};

class Dpbf {
 public:
  explicit Dpbf(const FilterParams& params);
  static Dpbf Create(std::uint64_t universe_size, std::uint32_t depth, std::uint32_t hash_count, double target_fpr,
                     std::uint64_t seed);

  Dpbf(const Dpbf& other);
  Dpbf& operator=(const Dpbf& other);
  Dpbf(Dpbf&&) noexcept = default;
  Dpbf& operator=(Dpbf&&) noexcept = default;
  ~Dpbf() = default;

  // Throws kOutOfUniverse for ids >= universe_size.
  void Insert(std::uint64_t element);
  [[nodiscard]] bool Query(std::uint64_t element) const;

  [[nodiscard]] const FilterParams& params() const noexcept { return params_; }
  [[nodiscard]] const PuBFMap& map() const noexcept { return map_; }
  [[nodiscard]] const CpbptNode& root() const noexcept { return *root_; }

  [[nodiscard]] DpbfStats Stats() const;
  // Leaves in left-to-right order.
  [[nodiscard]] std::vector<LeafInfo> Leaves() const;
  // Full structural audit; throws kCorruptPayload naming the broken invariant.
  void CheckInvariants() const;

  // Little-endian "DPBF" v1 payload: params plus the map sorted by leaf
  // index. The tree is rebuilt on load.
  [[nodiscard]] std::vector<std::uint8_t> Serialize() const;
  static Dpbf Deserialize(std::span<const std::uint8_t> bytes);

 private:
  Dpbf(const FilterParams& params, PuBFMap map);
  [[nodiscard]] const CpbptNode& LeafFor(std::uint64_t leaf) const noexcept;
  friend Dpbf Union(const Dpbf& a, const Dpbf& b);
  friend Dpbf Intersect(const Dpbf& a, const Dpbf& b);

  FilterParams params_;
  PuBFMap map_;
  std::unique_ptr<CpbptNode> root_;
};

// Both throw kParamMismatch unless the params (seed included) are identical.
Dpbf Union(const Dpbf& a, const Dpbf& b);
Dpbf Intersect(const Dpbf& a, const Dpbf& b);

}  // namespace dpbf
