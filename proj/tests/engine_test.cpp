#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "dpbf/engine.hpp"
#include "dpbf/error.hpp"
#include "definition_oracle.hpp"

using namespace dpbf;

namespace {

const std::vector<std::uint64_t> kExampleSet{4, 5, 8, 10, 17, 19, 22, 25, 31};

Dpbf Toy() { return Dpbf::Create(32, 3, 2, 0.7, 17); }

Dpbf Build(Dpbf d, const std::vector<std::uint64_t>& ids) {
  for (auto id : ids) d.Insert(id);
  return d;
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

std::set<std::uint64_t> RandomSet(std::mt19937_64& gen, std::uint64_t universe, std::size_t max_size) {
  std::set<std::uint64_t> s;
  const std::size_t n = gen() % (max_size + 1);
  while (s.size() < n) s.insert(gen() % universe);
  return s;
}

void CheckSpaceAccounting(const Dpbf& d, std::uint64_t distinct) {
  const DpbfStats st = d.Stats();
  const FilterParams& p = d.params();
  CHECK(st.total_bits == (st.s + st.populated_leaf_count) * p.bits_per_filter);
  CHECK(st.s * p.universe_size >= distinct * p.leaf_count());  // s >= ceil(|S| 2^d / |U|)
  CHECK(st.unit_filter_count <= 2 * st.s);
  CHECK(st.estimated_fpr_max <= p.target_fpr);
}

}  // namespace

TEST_CASE("fresh structure") {
  const Dpbf d = Toy();
  CHECK(d.params().target_population == 4);
  for (std::uint64_t id = 0; id < 32; ++id) CHECK_FALSE(d.Query(id));
  const DpbfStats st = d.Stats();
  CHECK(st.s == 0);
  CHECK(st.total_bits == 0);
  CHECK(st.cpbpt_leaf_count == 1);
  CHECK(d.root().is_leaf());
  CHECK(d.root().count == 0);
  CHECK_FALSE(d.root().ubf.has_value());
  d.CheckInvariants();
}

TEST_CASE("worked example: |U| = 32, d = 3") {
  const Dpbf d = Build(Toy(), kExampleSet);
  d.CheckInvariants();

  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto& [key, unit] : d.map()) counts[key] = unit.insert_count;
  CHECK(counts == std::map<std::uint64_t, std::uint64_t>{{1, 2}, {2, 2}, {4, 2}, {5, 1}, {6, 1}, {7, 1}});

  const std::vector<LeafInfo> expect{{{1, 0}, 4, true}, {{2, 2}, 3, true}, {{2, 3}, 2, true}};
  CHECK(d.Leaves() == expect);

  // (2,2) and (2,3) stay apart because their parent holds 5 > n_t.
  const CpbptNode& right = *d.root().right;
  CHECK(right.coord == NodeCoord{1, 1});
  CHECK(right.count == 5);
  CHECK_FALSE(right.is_leaf());

  const DpbfStats st = d.Stats();
  CHECK(st.s == 6);
  CHECK(st.populated_leaf_count == 3);
  CHECK(st.total_bits == 45);
  CHECK(st.s >= 3);
  CHECK(st.inserted == 9);

  for (auto id : kExampleSet) CHECK(d.Query(id));
}

TEST_CASE("unpopulated regions answer false") {
  const Dpbf d = Build(Toy(), {0, 1, 2, 3, 4});
  d.CheckInvariants();
  const std::vector<LeafInfo> expect{{{3, 0}, 4, true}, {{3, 1}, 1, true}, {{2, 1}, 0, false}, {{1, 1}, 0, false}};
  CHECK(d.Leaves() == expect);
  CHECK(d.Leaves() == oracle::DefinitionLeaves({0, 1, 2, 3, 4}, 32, 3, 4));
  for (std::uint64_t id = 8; id < 32; ++id) CHECK_FALSE(d.Query(id));
}

TEST_CASE("single unit compresses to the root") {
  const Dpbf d = Build(Toy(), {9, 10, 11});
  CHECK(d.root().is_leaf());
  CHECK(d.root().count == 3);
  CHECK(d.Stats().s == 1);
}

TEST_CASE("out-of-universe ids") {
  Dpbf d = Toy();
  CHECK(CodeOf([&] { d.Insert(32); }) == ErrorCode::kOutOfUniverse);
  CHECK(CodeOf([&] { (void)d.Query(1000); }) == ErrorCode::kOutOfUniverse);

  Dpbf padded = Dpbf::Create(33, 3, 2, 0.7, 1);
  CHECK(padded.params().universe_size == 40);
  padded.Insert(39);
  CHECK(padded.Query(39));
  CHECK(CodeOf([&] { padded.Insert(40); }) == ErrorCode::kOutOfUniverse);
}

TEST_CASE("duplicate inserts count but are capped per leaf") {
  Dpbf d = Toy();
  for (int i = 0; i < 10; ++i) d.Insert(4);
  CHECK(d.map().at(1).insert_count == 4);
  CHECK(d.root().count == 4);
  CHECK(d.root().is_leaf());
  d.Insert(20);
  // Inflated counts only split earlier.
  CHECK(d.root().count == 5);
  CHECK_FALSE(d.root().is_leaf());
  d.CheckInvariants();

  // A full leaf-level namespace cannot split further.
  Dpbf full = Toy();
  for (int rep = 0; rep < 3; ++rep) {
    for (std::uint64_t id = 8; id < 12; ++id) full.Insert(id);
  }
  full.Insert(12);
  full.CheckInvariants();
  for (const LeafInfo& leaf : full.Leaves()) CHECK(leaf.count <= 4);
}

TEST_CASE("randomized: incremental tree matches the definition and compress") {
  std::mt19937_64 gen(4242);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint32_t depth = 1 + static_cast<std::uint32_t>(gen() % 7);
    const std::uint64_t universe = 1 << 10;
    const auto set = RandomSet(gen, universe, 300);
    std::vector<std::uint64_t> order(set.begin(), set.end());
    std::shuffle(order.begin(), order.end(), gen);
    const Dpbf d = Build(Dpbf::Create(universe, depth, 3, 0.1, gen()), order);

    REQUIRE(SameTree(d.root(), *Compress(d.map(), d.params())));
    REQUIRE(d.Leaves() == oracle::DefinitionLeaves(set, universe, depth, d.params().target_population));
    CHECK(d.root().count == set.size());
    CheckSpaceAccounting(d, set.size());
    if (trial % 50 == 0) d.CheckInvariants();
    for (auto id : set) REQUIRE(d.Query(id));
  }
}

TEST_CASE("positive monotonicity and reconstruction") {
  std::mt19937_64 gen(5);
  const std::uint64_t universe = 1 << 10;
  const auto set = RandomSet(gen, universe, 400);
  const Dpbf d = Build(Dpbf::Create(universe, 5, 2, 0.2, 3), {set.begin(), set.end()});
  d.CheckInvariants();
  for (std::uint64_t id = 0; id < universe; ++id) {
    const auto it = d.map().find(LeafIndexOf(id, 5, universe));
    if (it != d.map().end() && it->second.ubf.Query(id)) CHECK(d.Query(id));
  }
}

TEST_CASE("union") {
  const Dpbf full = Build(Toy(), kExampleSet);
  const Dpbf lo = Build(Toy(), {4, 5, 8, 10});
  const Dpbf hi = Build(Toy(), {17, 19, 22, 25, 31});
  const Dpbf u = Union(lo, hi);
  u.CheckInvariants();
  CHECK(SameTree(u.root(), full.root()));
  CHECK(u.Serialize() == full.Serialize());

  SUBCASE("identity") {
    const Dpbf with_empty = Union(full, Toy());
    for (std::uint64_t id = 0; id < 32; ++id) CHECK(with_empty.Query(id) == full.Query(id));
    CHECK(with_empty.Serialize() == full.Serialize());
  }
  SUBCASE("disjoint halves") {
    std::set<std::uint64_t> keys;
    for (const auto& [k, _] : u.map()) keys.insert(k);
    std::set<std::uint64_t> expect;
    for (const auto& [k, _] : lo.map()) expect.insert(k);
    for (const auto& [k, _] : hi.map()) expect.insert(k);
    CHECK(keys == expect);
  }
  SUBCASE("overlapping counts are capped") {
    const Dpbf a = Build(Toy(), {8, 9, 10});
    const Dpbf b = Build(Toy(), {9, 10, 11});
    const Dpbf ab = Union(a, b);
    CHECK(ab.map().at(2).insert_count == 4);
    ab.CheckInvariants();
  }
  SUBCASE("mismatched params") {
    CHECK(CodeOf([&] { (void)Union(full, Dpbf::Create(32, 3, 2, 0.7, 18)); }) == ErrorCode::kParamMismatch);
    CHECK(CodeOf([&] { (void)Union(full, Dpbf::Create(64, 3, 2, 0.7, 17)); }) == ErrorCode::kParamMismatch);
    CHECK(CodeOf([&] { (void)Intersect(full, Dpbf::Create(32, 2, 2, 0.7, 17)); }) == ErrorCode::kParamMismatch);
  }
}

TEST_CASE("intersect") {
  const Dpbf full = Build(Toy(), kExampleSet);
  const Dpbf self = Intersect(full, full);
  for (std::uint64_t id = 0; id < 32; ++id) CHECK(self.Query(id) == full.Query(id));

  const Dpbf lo = Build(Toy(), {4, 5, 8, 10});
  const Dpbf hi = Build(Toy(), {17, 19, 22, 25, 31});
  const Dpbf none = Intersect(lo, hi);
  CHECK(none.map().empty());
  for (std::uint64_t id = 0; id < 32; ++id) CHECK_FALSE(none.Query(id));

  SUBCASE("random sets keep every common element") {
    std::mt19937_64 gen(31337);
    const std::uint64_t universe = 1 << 10;
    for (int trial = 0; trial < 200; ++trial) {
      const auto s1 = RandomSet(gen, universe, 500);
      const auto s2 = RandomSet(gen, universe, 500);
      const std::uint64_t seed = gen();
      const Dpbf a = Build(Dpbf::Create(universe, 4, 3, 0.05, seed), {s1.begin(), s1.end()});
      const Dpbf b = Build(Dpbf::Create(universe, 4, 3, 0.05, seed), {s2.begin(), s2.end()});
      const Dpbf both = Intersect(a, b);
      both.CheckInvariants();
      for (auto id : s1) {
        if (s2.count(id) != 0) REQUIRE(both.Query(id));
      }
      for (const auto& [k, unit] : both.map()) {
        CHECK(unit.insert_count == std::min(a.map().at(k).insert_count, b.map().at(k).insert_count));
      }
    }
  }
}

TEST_CASE("copying rebuilds an identical structure") {
  const Dpbf d = Build(Toy(), kExampleSet);
  Dpbf copy = d;
  CHECK(SameTree(copy.root(), d.root()));
  copy.Insert(0);
  CHECK(copy.Query(0));
  CHECK(d.root().count == 9);
}

TEST_CASE("space and fpr bounds at scale") {
  std::mt19937_64 gen(77);
  const std::uint64_t universe = std::uint64_t{1} << 24;
  Dpbf d = Dpbf::Create(universe, 14, 7, 0.01, 1);
  std::set<std::uint64_t> set;
  while (set.size() < 10'000) set.insert(gen() % universe);
  for (auto id : set) d.Insert(id);
  CheckSpaceAccounting(d, set.size());
  d.CheckInvariants();

  std::uint64_t fp = 0;
  std::uint64_t probes = 0;
  while (probes < 1'000'000) {
    const std::uint64_t id = gen() % universe;
    if (set.count(id) != 0) continue;
    ++probes;
    fp += d.Query(id) ? 1 : 0;
  }
  CHECK(static_cast<double>(fp) / static_cast<double>(probes) <= 1.3e-2);
}
