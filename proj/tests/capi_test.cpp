#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "dpbf/dpbf.h"

namespace {

struct FilterPtr {
  dpbf_filter* p = nullptr;
  FilterPtr() = default;
  FilterPtr(const FilterPtr&) = delete;
  FilterPtr& operator=(const FilterPtr&) = delete;
  ~FilterPtr() { dpbf_filter_free(p); }
};

std::vector<std::uint8_t> Bytes(const dpbf_filter* f) {
  std::uint8_t* buf = nullptr;
  std::size_t len = 0;
  REQUIRE(dpbf_filter_serialize(f, &buf, &len) == DPBF_OK);
  std::vector<std::uint8_t> out(buf, buf + len);
  dpbf_bytes_free(buf);
  return out;
}

}  // namespace

TEST_CASE("formulas") {
  std::uint64_t bits = 0;
  CHECK(dpbf_size_for(1000, 7, 0.01, &bits) == DPBF_OK);
  CHECK(bits == 9593);
  std::uint64_t n = 0;
  CHECK(dpbf_population_for(bits, 7, 0.01, &n) == DPBF_OK);
  CHECK(n == 1000);
  double f = 0;
  CHECK(dpbf_estimated_fpr(1000, 9593, 7, &f) == DPBF_OK);
  CHECK(f <= 0.01);
  CHECK(dpbf_fpr_lower_bound(3, 1, 0.01, &f) == DPBF_OK);
  CHECK(f == doctest::Approx(0.029701));

  bits = 77;
  CHECK(dpbf_size_for(10, 7, 1.5, &bits) == DPBF_ERR_INVALID_PARAMETER);
  CHECK(bits == 77);
  CHECK(std::strlen(dpbf_last_error()) > 0);
  CHECK(dpbf_size_for(std::uint64_t{1} << 62, 7, 1e-9, &bits) == DPBF_ERR_OVERFLOW);
  CHECK(dpbf_size_for(10, 7, 0.1, nullptr) == DPBF_ERR_INVALID_PARAMETER);
  CHECK(std::string(dpbf_status_name(DPBF_ERR_OUT_OF_UNIVERSE)) != dpbf_status_name(DPBF_OK));
}

TEST_CASE("filter lifecycle") {
  FilterPtr f;
  REQUIRE(dpbf_filter_new(32, 3, 2, 0.1, 0, &f.p) == DPBF_OK);
  for (std::uint64_t id : {4, 5, 8, 10, 17, 19, 22, 25, 31}) REQUIRE(dpbf_filter_insert(f.p, id) == DPBF_OK);
  int member = 0;
  CHECK(dpbf_filter_query(f.p, 22, &member) == DPBF_OK);
  CHECK(member == 1);
  CHECK(dpbf_filter_insert(f.p, 32) == DPBF_ERR_OUT_OF_UNIVERSE);
  CHECK(dpbf_filter_query(f.p, 99, &member) == DPBF_ERR_OUT_OF_UNIVERSE);
  CHECK(dpbf_filter_check(f.p) == DPBF_OK);

  dpbf_params params{};
  REQUIRE(dpbf_filter_get_params(f.p, &params) == DPBF_OK);
  CHECK(params.universe_size == 32);
  CHECK(params.target_population == 4);

  dpbf_stats stats{};
  REQUIRE(dpbf_filter_get_stats(f.p, &stats) == DPBF_OK);
  CHECK(stats.s == 6);
  CHECK(stats.populated_leaf_count == 3);
  CHECK(stats.unit_filter_count == 9);
  CHECK(stats.total_bits == 9 * params.bits_per_filter);

  std::size_t count = 0;
  CHECK(dpbf_filter_leaves(f.p, nullptr, 0, &count) == DPBF_OK);
  CHECK(count == 3);
  std::vector<dpbf_leaf> leaves(2);
  CHECK(dpbf_filter_leaves(f.p, leaves.data(), leaves.size(), &count) == DPBF_OK);
  CHECK(count == 3);
  CHECK(leaves[0].level == 1);
  CHECK(leaves[0].index == 0);
  CHECK(leaves[0].count == 4);
  CHECK(leaves[0].populated == 1);
  CHECK(dpbf_filter_leaves(f.p, nullptr, 3, &count) == DPBF_ERR_INVALID_PARAMETER);

  std::vector<dpbf_unit> units(8);
  CHECK(dpbf_filter_units(f.p, units.data(), units.size(), &count) == DPBF_OK);
  CHECK(count == 6);
  CHECK(units[0].leaf_index == 1);
  CHECK(units[0].insert_count == 2);

  FilterPtr c;
  REQUIRE(dpbf_filter_clone(f.p, &c.p) == DPBF_OK);
  CHECK(Bytes(c.p) == Bytes(f.p));

  const auto bytes = Bytes(f.p);
  FilterPtr back;
  REQUIRE(dpbf_filter_deserialize(bytes.data(), bytes.size(), &back.p) == DPBF_OK);
  CHECK(Bytes(back.p) == bytes);
  FilterPtr bad;
  CHECK(dpbf_filter_deserialize(bytes.data(), bytes.size() - 1, &bad.p) == DPBF_ERR_CORRUPT_PAYLOAD);
  CHECK(bad.p == nullptr);
  CHECK(dpbf_filter_deserialize(nullptr, 4, &bad.p) == DPBF_ERR_INVALID_PARAMETER);

  FilterPtr empty;
  REQUIRE(dpbf_filter_new(32, 3, 2, 0.1, 0, &empty.p) == DPBF_OK);
  FilterPtr u;
  REQUIRE(dpbf_filter_union(f.p, empty.p, &u.p) == DPBF_OK);
  CHECK(Bytes(u.p) == bytes);
  FilterPtr i;
  REQUIRE(dpbf_filter_intersect(f.p, empty.p, &i.p) == DPBF_OK);
  REQUIRE(dpbf_filter_get_stats(i.p, &stats) == DPBF_OK);
  CHECK(stats.s == 0);

  FilterPtr other;
  REQUIRE(dpbf_filter_new(32, 3, 2, 0.1, 1, &other.p) == DPBF_OK);
  FilterPtr m;
  CHECK(dpbf_filter_union(f.p, other.p, &m.p) == DPBF_ERR_PARAM_MISMATCH);
  CHECK(m.p == nullptr);
}

TEST_CASE("filter_new validation") {
  FilterPtr f;
  CHECK(dpbf_filter_new(32, 3, 0, 0.1, 0, &f.p) == DPBF_ERR_INVALID_PARAMETER);
  CHECK(dpbf_filter_new(32, 3, 256, 0.1, 0, &f.p) == DPBF_ERR_INVALID_PARAMETER);
  CHECK(dpbf_filter_new(32, 3, 2, 0.0, 0, &f.p) == DPBF_ERR_INVALID_PARAMETER);
  CHECK(dpbf_filter_new(32, 63, 2, 0.1, 0, &f.p) == DPBF_ERR_INVALID_PARAMETER);
  CHECK(dpbf_filter_new(32, 3, 2, 0.1, 0, nullptr) == DPBF_ERR_INVALID_PARAMETER);
  CHECK(f.p == nullptr);
  dpbf_filter_free(nullptr);
}

TEST_CASE("dbf") {
  dpbf_dbf* d = nullptr;
  REQUIRE(dpbf_dbf_new(9593, 7, 0.01, 1, &d) == DPBF_OK);
  std::uint64_t nt = 0;
  CHECK(dpbf_dbf_target_population(d, &nt) == DPBF_OK);
  CHECK(nt == 1000);
  for (std::uint64_t i = 0; i <= nt; ++i) REQUIRE(dpbf_dbf_insert(d, i) == DPBF_OK);
  std::uint64_t units = 0;
  CHECK(dpbf_dbf_filter_count(d, &units) == DPBF_OK);
  CHECK(units == 2);
  int member = 0;
  CHECK(dpbf_dbf_query(d, 500, &member) == DPBF_OK);
  CHECK(member == 1);
  double t = 0;
  double uf = 0;
  CHECK(dpbf_dbf_theoretical_fpr(d, &t) == DPBF_OK);
  CHECK(dpbf_dbf_unit_fpr(d, &uf) == DPBF_OK);
  CHECK(t >= uf);
  dpbf_dbf_free(d);
  d = nullptr;
  CHECK(dpbf_dbf_new(1, 7, 0.01, 1, &d) != DPBF_OK);
  CHECK(d == nullptr);
}

namespace {

void Collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->emplace_back(line); }

}  // namespace

TEST_CASE("bench") {
  dpbf_structure s{};
  CHECK(dpbf_structure_parse("dbf", &s) == DPBF_OK);
  CHECK(s == DPBF_STRUCTURE_DBF);
  CHECK(dpbf_structure_parse("nope", &s) == DPBF_ERR_CONFIG);

  const dpbf_structure structures[] = {DPBF_STRUCTURE_DPBF, DPBF_STRUCTURE_SBF};
  const std::uint64_t sizes[] = {100, 1000};
  const std::uint64_t seeds[] = {1};
  dpbf_bench_config cfg{};
  cfg.mode = DPBF_BENCH_FPR;
  cfg.universe_size = 1 << 20;
  cfg.depth = 10;
  cfg.hash_count = 7;
  cfg.target_fpr = 0.01;
  cfg.structures = structures;
  cfg.structure_count = 2;
  cfg.sizes = sizes;
  cfg.size_count = 2;
  cfg.seeds = seeds;
  cfg.seed_count = 1;
  cfg.probes = 1000;
  cfg.repetitions = 1;
  std::vector<std::string> lines;
  REQUIRE(dpbf_bench_run(&cfg, Collect, &lines) == DPBF_OK);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == dpbf_csv_header());
  CHECK(lines[1].rfind("dpbf,100,", 0) == 0);

  cfg.probes = 0;
  CHECK(dpbf_bench_run(&cfg, Collect, &lines) == DPBF_ERR_CONFIG);
  CHECK(dpbf_bench_run(&cfg, nullptr, nullptr) == DPBF_ERR_INVALID_PARAMETER);
}

TEST_CASE("verify_dbf_bound") {
  dpbf_bound_check out{};
  REQUIRE(dpbf_verify_dbf_bound(1 << 20, 10, 7, 0.01, 4, 200'000, 1, &out) == DPBF_OK);
  CHECK(out.set_size == 4 * out.n_t);
  CHECK(out.theoretical_holds == 1);
  CHECK(out.measured_holds == 1);
  CHECK(dpbf_verify_dbf_bound(1 << 20, 10, 7, 0.01, -1, 1000, 1, &out) != DPBF_OK);
}
