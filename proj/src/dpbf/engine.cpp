#include "dpbf/engine.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstring>
#include <string>

#include "dpbf/error.hpp"

namespace dpbf {
namespace {

using MapIter = PuBFMap::const_iterator;

std::unique_ptr<CpbptNode> BuildSubtree(NodeCoord coord, MapIter first, MapIter last, const PuBFMap& map,
                                        const FilterParams& params) {
  auto node = std::make_unique<CpbptNode>();
  node->coord = coord;
  for (auto it = first; it != last; ++it) node->count += it->second.insert_count;

  if (node->count <= params.target_population || coord.level == params.depth) {
    if (first != last) {
      node->ubf.emplace(first->second.ubf);
      for (auto it = std::next(first); it != last; ++it) node->ubf->OrWith(it->second.ubf);
    }
    return node;
  }
  const auto [lc, rc] = Children(coord, params.depth);
  // Every key in [first, last) lies in coord's span, so this stays in range.
  const MapIter split = map.lower_bound(LeafSpan(rc, params.depth).start);
  node->left = BuildSubtree(lc, first, split, map, params);
  node->right = BuildSubtree(rc, split, last, map, params);
  return node;
}

std::pair<MapIter, MapIter> SpanRange(const PuBFMap& map, NodeCoord coord, std::uint32_t depth) {
  const IdRange span = LeafSpan(coord, depth);
  return {map.lower_bound(span.start), map.lower_bound(span.end)};
}

void CollectLeaves(const CpbptNode& node, std::vector<LeafInfo>& out) {
  if (node.is_leaf()) {
    out.push_back({node.coord, node.count, node.ubf.has_value()});
    return;
  }
  CollectLeaves(*node.left, out);
  CollectLeaves(*node.right, out);
}

// ---- little-endian wire helpers ----

constexpr std::uint8_t kMagic[4] = {'D', 'P', 'B', 'F'};
constexpr std::uint8_t kVersion = 0x01;

class Writer {
 public:
  void Bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> Take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> Bytes(std::size_t n) {
    if (remaining() < n) Fail(ErrorCode::kCorruptPayload, "truncated payload");
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t U8() { return Bytes(1)[0]; }
  std::uint64_t U64() {
    auto b = Bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  [[nodiscard]] std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

[[noreturn]] void Corrupt(const std::string& what) { Fail(ErrorCode::kCorruptPayload, what); }

void AuditNode(const CpbptNode& node, const PuBFMap& map, const FilterParams& params) {
  const auto [first, last] = SpanRange(map, node.coord, params.depth);
  std::uint64_t spanned = 0;
  for (auto it = first; it != last; ++it) spanned += it->second.insert_count;
  if (node.count != spanned) Corrupt("node count differs from the spanned map counts");
  if (node.is_leaf()) {
    if (node.right) Corrupt("node with a single child");
    if (node.count > params.target_population) Corrupt("leaf count exceeds the target population");
    if (node.ubf.has_value() != (node.count > 0)) Corrupt("leaf filter presence disagrees with its count");
    if (node.ubf) {
      UnitBloomFilter expect(params.shape());
      for (auto it = first; it != last; ++it) expect.OrWith(it->second.ubf);
      if (!(expect == *node.ubf)) Corrupt("leaf filter is not the OR of its spanned map filters");
    }
    return;
  }
  if (!node.right) Corrupt("node with a single child");
  if (node.ubf) Corrupt("internal node holds a filter");
  if (node.count <= params.target_population) Corrupt("internal node count within the target population");
  if (node.left->coord != Children(node.coord, params.depth).first ||
      node.right->coord != Children(node.coord, params.depth).second) {
    Corrupt("child coordinates do not refine the parent");
  }
  AuditNode(*node.left, map, params);
  AuditNode(*node.right, map, params);
}

}  // namespace

std::unique_ptr<CpbptNode> Compress(const PuBFMap& map, const FilterParams& params) {
  return BuildSubtree({0, 0}, map.begin(), map.end(), map, params);
}

bool SameTree(const CpbptNode& a, const CpbptNode& b) {
  if (a.coord != b.coord || a.count != b.count || a.ubf != b.ubf || a.is_leaf() != b.is_leaf()) return false;
  return a.is_leaf() || (SameTree(*a.left, *b.left) && SameTree(*a.right, *b.right));
}

Dpbf::Dpbf(const FilterParams& params) : params_(params), root_(std::make_unique<CpbptNode>()) {}

Dpbf::Dpbf(const FilterParams& params, PuBFMap map)
    : params_(params), map_(std::move(map)), root_(Compress(map_, params_)) {}

Dpbf Dpbf::Create(std::uint64_t universe_size, std::uint32_t depth, std::uint32_t hash_count, double target_fpr,
                  std::uint64_t seed) {
  return Dpbf(FilterParams::Make(universe_size, depth, hash_count, target_fpr, seed));
}

Dpbf::Dpbf(const Dpbf& other) : Dpbf(other.params_, other.map_) {}

Dpbf& Dpbf::operator=(const Dpbf& other) {
  if (this != &other) *this = Dpbf(other);
  return *this;
}

void Dpbf::Insert(std::uint64_t element) {
  const std::uint64_t leaf = LeafIndexOf(element, params_.depth, params_.universe_size);
  const ProbeHash hash = ProbeHash::Of(element, params_.hash_seed);

  auto it = map_.find(leaf);
  if (it == map_.end()) it = map_.emplace(leaf, PopulatedUnit{leaf, 0, UnitBloomFilter(params_.shape())}).first;
  PopulatedUnit& unit = it->second;
  unit.ubf.Insert(hash);
  // The leaf namespace holds at most n_t distinct ids; further counting
  // would only reflect duplicates.
  const bool counted = unit.insert_count < params_.target_population;
  if (counted) ++unit.insert_count;

  CpbptNode* node = root_.get();
  while (!node->is_leaf()) {
    if (counted) ++node->count;
    const std::uint32_t shift = params_.depth - node->coord.level - 1;
    node = ((leaf >> shift) & 1U) != 0 ? node->right.get() : node->left.get();
  }
  if (counted) ++node->count;
  if (!node->ubf) node->ubf.emplace(params_.shape());
  node->ubf->Insert(hash);

  if (node->count > params_.target_population && node->coord.level < params_.depth) {
    const auto [first, last] = SpanRange(map_, node->coord, params_.depth);
    *node = std::move(*BuildSubtree(node->coord, first, last, map_, params_));
  }
  assert(LeafFor(leaf).count <= params_.target_population);
}

const CpbptNode& Dpbf::LeafFor(std::uint64_t leaf) const noexcept {
  const CpbptNode* node = root_.get();
  while (!node->is_leaf()) {
    const std::uint32_t shift = params_.depth - node->coord.level - 1;
    node = ((leaf >> shift) & 1U) != 0 ? node->right.get() : node->left.get();
  }
  return *node;
}

bool Dpbf::Query(std::uint64_t element) const {
  const CpbptNode& node = LeafFor(LeafIndexOf(element, params_.depth, params_.universe_size));
  // Unpopulated regions answer without hashing.
  return node.ubf && node.ubf->Query(ProbeHash::Of(element, params_.hash_seed));
}

DpbfStats Dpbf::Stats() const {
  DpbfStats st;
  st.s = map_.size();
  st.inserted = root_->count;
  std::vector<const CpbptNode*> stack{root_.get()};
  while (!stack.empty()) {
    const CpbptNode* n = stack.back();
    stack.pop_back();
    if (!n->is_leaf()) {
      ++st.internal_node_count;
      stack.push_back(n->left.get());
      stack.push_back(n->right.get());
      continue;
    }
    ++st.cpbpt_leaf_count;
    if (n->ubf) {
      ++st.populated_leaf_count;
      st.estimated_fpr_max =
          std::max(st.estimated_fpr_max, EstimatedFpr(n->count, params_.bits_per_filter, params_.hash_count));
    }
  }
  st.unit_filter_count = st.s + st.populated_leaf_count;
  st.total_bits = st.unit_filter_count * params_.bits_per_filter;
  // Each unit holds at most n_t counted inserts, so s >= ceil(total / n_t).
  assert(st.s * params_.target_population >= st.inserted);
  assert(st.populated_leaf_count <= st.s);
  return st;
}

std::vector<LeafInfo> Dpbf::Leaves() const {
  std::vector<LeafInfo> out;
  CollectLeaves(*root_, out);
  return out;
}

void Dpbf::CheckInvariants() const {
  for (const auto& [key, unit] : map_) {
    if (key != unit.leaf_index) Corrupt("map key differs from the unit leaf index");
    if (key >= params_.leaf_count()) Corrupt("leaf index outside [0, 2^d)");
    if (unit.insert_count < 1) Corrupt("empty unit stored in the map");
    if (unit.insert_count > params_.target_population) Corrupt("unit count exceeds the target population");
    if (!(unit.ubf.shape() == params_.shape())) Corrupt("unit filter shape differs from the params");
  }
  if (root_->coord != NodeCoord{0, 0}) Corrupt("root is not (0, 0)");
  AuditNode(*root_, map_, params_);
  const DpbfStats st = Stats();
  if (st.unit_filter_count > 2 * st.s) Corrupt("more than 2s unit filters allocated");
}

std::vector<std::uint8_t> Dpbf::Serialize() const {
  Writer w;
  w.Bytes(kMagic);
  w.U8(kVersion);
  w.U64(params_.universe_size);
  w.U8(static_cast<std::uint8_t>(params_.depth));
  w.U8(static_cast<std::uint8_t>(params_.hash_count));
  w.F64(params_.target_fpr);
  w.U64(params_.bits_per_filter);
  w.U64(params_.hash_seed);
  w.U64(map_.size());
  for (const auto& [key, unit] : map_) {
    w.U64(key);
    w.U64(unit.insert_count);
    w.Bytes(unit.ubf.ToBytes());
  }
  return w.Take();
}

Dpbf Dpbf::Deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.Bytes(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) Corrupt("bad magic");
  if (r.U8() != kVersion) Corrupt("unsupported version");

  const std::uint64_t universe = r.U64();
  const std::uint32_t depth = r.U8();
  const std::uint32_t hashes = r.U8();
  const double fpr = r.F64();
  const std::uint64_t bits = r.U64();
  const std::uint64_t seed = r.U64();

  FilterParams params;
  try {
    params = FilterParams::Make(universe, depth, hashes, fpr, seed);
  } catch (const Error& e) {
    Corrupt(std::string("invalid params: ") + e.what());
  }
  if (params.universe_size != universe) Corrupt("universe size is not a multiple of 2^depth");
  if (params.bits_per_filter != bits) Corrupt("bits per filter disagree with the sizing formula");

  const std::uint64_t entries = r.U64();
  const std::size_t filter_bytes = static_cast<std::size_t>((bits + 7) / 8);
  const std::size_t entry_bytes = 16 + filter_bytes;
  if (entries > params.leaf_count() || entries > r.remaining() / entry_bytes) Corrupt("truncated payload");

  PuBFMap map;
  for (std::uint64_t e = 0; e < entries; ++e) {
    const std::uint64_t leaf = r.U64();
    const std::uint64_t count = r.U64();
    if (leaf >= params.leaf_count()) Corrupt("leaf index outside [0, 2^d)");
    if (!map.empty() && leaf <= map.rbegin()->first) Corrupt("entries not strictly ascending");
    if (count < 1) Corrupt("invariant violation: empty unit");
    if (count > params.target_population) Corrupt("invariant violation: unit count exceeds the target population");
    map.emplace_hint(map.end(), leaf,
                     PopulatedUnit{leaf, count, UnitBloomFilter::FromBytes(params.shape(), r.Bytes(filter_bytes))});
  }
  if (r.remaining() != 0) Corrupt("trailing bytes after the last entry");
  return Dpbf(params, std::move(map));
}

Dpbf Union(const Dpbf& a, const Dpbf& b) {
  if (!(a.params_ == b.params_)) Fail(ErrorCode::kParamMismatch, "union needs identical params");
  PuBFMap merged = a.map_;
  for (const auto& [key, unit] : b.map_) {
    auto [it, fresh] = merged.try_emplace(key, unit);
    if (!fresh) {
      it->second.ubf.OrWith(unit.ubf);
      it->second.insert_count = std::min(it->second.insert_count + unit.insert_count, a.params_.target_population);
    }
  }
  return Dpbf(a.params_, std::move(merged));
}

Dpbf Intersect(const Dpbf& a, const Dpbf& b) {
  if (!(a.params_ == b.params_)) Fail(ErrorCode::kParamMismatch, "intersection needs identical params");
  PuBFMap kept;
  for (const auto& [key, unit] : a.map_) {
    const auto other = b.map_.find(key);
    if (other == b.map_.end()) continue;
    kept.emplace_hint(kept.end(), key,
                      PopulatedUnit{key, std::min(unit.insert_count, other->second.insert_count),
                                    MergeAnd(unit.ubf, other->second.ubf)});
  }
  return Dpbf(a.params_, std::move(kept));
}

}  // namespace dpbf
