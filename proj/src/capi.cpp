#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "dpbf/dbf.hpp"
#include "dpbf/dpbf.h"
#include "dpbf/engine.hpp"
#include "dpbf/error.hpp"
#include "dpbf/eval.hpp"

struct dpbf_filter {
  dpbf::Dpbf impl;
};

struct dpbf_dbf {
  dpbf::Dbf impl;
};

namespace {

thread_local std::string g_last_error;

dpbf_status ToStatus(dpbf::ErrorCode code) {
  switch (code) {
    case dpbf::ErrorCode::kInvalidParameter:
      return DPBF_ERR_INVALID_PARAMETER;
    case dpbf::ErrorCode::kOverflow:
      return DPBF_ERR_OVERFLOW;
    case dpbf::ErrorCode::kOutOfUniverse:
      return DPBF_ERR_OUT_OF_UNIVERSE;
    case dpbf::ErrorCode::kParamMismatch:
      return DPBF_ERR_PARAM_MISMATCH;
    case dpbf::ErrorCode::kCorruptPayload:
      return DPBF_ERR_CORRUPT_PAYLOAD;
    case dpbf::ErrorCode::kCapacity:
      return DPBF_ERR_CAPACITY;
    case dpbf::ErrorCode::kConfig:
      return DPBF_ERR_CONFIG;
    case dpbf::ErrorCode::kIo:
      return DPBF_ERR_IO;
  }
  return DPBF_ERR_INTERNAL;
}

dpbf_status Report(dpbf_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <typename Fn>
dpbf_status Guard(Fn&& fn) noexcept {
  try {
    fn();
    return DPBF_OK;
  } catch (const dpbf::Error& e) {
    return Report(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Report(DPBF_ERR_NO_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return Report(DPBF_ERR_INTERNAL, e.what());
  } catch (...) {
    return Report(DPBF_ERR_INTERNAL, "unknown exception");
  }
}

#define DPBF_REQUIRE(cond)                                                      \
  do {                                                                          \
    if (!(cond)) return Report(DPBF_ERR_INVALID_PARAMETER, "null argument: " #cond); \
  } while (0)

dpbf::FamilyConfig Family(uint64_t universe_size, uint32_t depth, uint32_t hash_count, double target_fpr) {
  return {universe_size, depth, hash_count, target_fpr};
}

}  // namespace

extern "C" {

const char* dpbf_status_name(dpbf_status status) {
  switch (status) {
    case DPBF_OK:
      return "ok";
    case DPBF_ERR_INVALID_PARAMETER:
      return "invalid parameter";
    case DPBF_ERR_OVERFLOW:
      return "overflow";
    case DPBF_ERR_OUT_OF_UNIVERSE:
      return "out of universe";
    case DPBF_ERR_PARAM_MISMATCH:
      return "parameter mismatch";
    case DPBF_ERR_CORRUPT_PAYLOAD:
      return "corrupt payload";
    case DPBF_ERR_CAPACITY:
      return "capacity";
    case DPBF_ERR_CONFIG:
      return "invalid config";
    case DPBF_ERR_IO:
      return "i/o failure";
    case DPBF_ERR_NO_MEMORY:
      return "out of memory";
    case DPBF_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* dpbf_last_error(void) { return g_last_error.c_str(); }

dpbf_status dpbf_size_for(uint64_t n, uint32_t k, double f, uint64_t* out_bits) {
  DPBF_REQUIRE(out_bits);
  return Guard([&] { *out_bits = dpbf::SizeFor(n, k, f); });
}

dpbf_status dpbf_population_for(uint64_t m, uint32_t k, double f, uint64_t* out_n) {
  DPBF_REQUIRE(out_n);
  return Guard([&] { *out_n = dpbf::PopulationFor(m, k, f); });
}

dpbf_status dpbf_estimated_fpr(uint64_t n, uint64_t m, uint32_t k, double* out_fpr) {
  DPBF_REQUIRE(out_fpr);
  return Guard([&] { *out_fpr = dpbf::EstimatedFpr(n, m, k); });
}

dpbf_status dpbf_fpr_lower_bound(uint64_t set_size, uint64_t n_t, double f_t, double* out_fpr) {
  DPBF_REQUIRE(out_fpr);
  return Guard([&] { *out_fpr = dpbf::FprLowerBound(set_size, n_t, f_t); });
}

dpbf_status dpbf_filter_new(uint64_t universe_size, uint32_t depth, uint32_t hash_count, double target_fpr,
                            uint64_t seed, dpbf_filter** out) {
  DPBF_REQUIRE(out);
  if (hash_count > 255) return Report(DPBF_ERR_INVALID_PARAMETER, "hash count must be <= 255");
  return Guard([&] {
    *out = new dpbf_filter{dpbf::Dpbf::Create(universe_size, depth, hash_count, target_fpr, seed)};
  });
}

void dpbf_filter_free(dpbf_filter* filter) { delete filter; }

dpbf_status dpbf_filter_clone(const dpbf_filter* filter, dpbf_filter** out) {
  DPBF_REQUIRE(filter && out);
  return Guard([&] { *out = new dpbf_filter{filter->impl}; });
}

dpbf_status dpbf_filter_insert(dpbf_filter* filter, uint64_t id) {
  DPBF_REQUIRE(filter);
  return Guard([&] { filter->impl.Insert(id); });
}

dpbf_status dpbf_filter_query(const dpbf_filter* filter, uint64_t id, int* out_member) {
  DPBF_REQUIRE(filter && out_member);
  return Guard([&] { *out_member = filter->impl.Query(id) ? 1 : 0; });
}

dpbf_status dpbf_filter_union(const dpbf_filter* a, const dpbf_filter* b, dpbf_filter** out) {
  DPBF_REQUIRE(a && b && out);
  return Guard([&] { *out = new dpbf_filter{dpbf::Union(a->impl, b->impl)}; });
}

dpbf_status dpbf_filter_intersect(const dpbf_filter* a, const dpbf_filter* b, dpbf_filter** out) {
  DPBF_REQUIRE(a && b && out);
  return Guard([&] { *out = new dpbf_filter{dpbf::Intersect(a->impl, b->impl)}; });
}

dpbf_status dpbf_filter_get_params(const dpbf_filter* filter, dpbf_params* out) {
  DPBF_REQUIRE(filter && out);
  const dpbf::FilterParams& p = filter->impl.params();
  *out = {p.universe_size, p.depth, p.hash_count, p.target_fpr, p.bits_per_filter, p.target_population, p.hash_seed};
  return DPBF_OK;
}

dpbf_status dpbf_filter_get_stats(const dpbf_filter* filter, dpbf_stats* out) {
  DPBF_REQUIRE(filter && out);
  return Guard([&] {
    const dpbf::DpbfStats st = filter->impl.Stats();
    *out = {st.s,
            st.cpbpt_leaf_count,
            st.populated_leaf_count,
            st.internal_node_count,
            st.unit_filter_count,
            st.total_bits,
            st.inserted,
            st.estimated_fpr_max};
  });
}

dpbf_status dpbf_filter_leaves(const dpbf_filter* filter, dpbf_leaf* out, size_t capacity, size_t* out_count) {
  DPBF_REQUIRE(filter && out_count && (out || capacity == 0));
  return Guard([&] {
    const auto leaves = filter->impl.Leaves();
    for (size_t i = 0; i < leaves.size() && i < capacity; ++i) {
      out[i] = {leaves[i].coord.level, leaves[i].coord.index, leaves[i].count, leaves[i].populated ? 1 : 0};
    }
    *out_count = leaves.size();
  });
}

dpbf_status dpbf_filter_units(const dpbf_filter* filter, dpbf_unit* out, size_t capacity, size_t* out_count) {
  DPBF_REQUIRE(filter && out_count && (out || capacity == 0));
  size_t i = 0;
  for (const auto& [key, unit] : filter->impl.map()) {
    if (i < capacity) out[i] = {key, unit.insert_count};
    ++i;
  }
  *out_count = i;
  return DPBF_OK;
}

dpbf_status dpbf_filter_check(const dpbf_filter* filter) {
  DPBF_REQUIRE(filter);
  return Guard([&] { filter->impl.CheckInvariants(); });
}

dpbf_status dpbf_filter_serialize(const dpbf_filter* filter, uint8_t** out_bytes, size_t* out_len) {
  DPBF_REQUIRE(filter && out_bytes && out_len);
  return Guard([&] {
    const std::vector<std::uint8_t> bytes = filter->impl.Serialize();
    auto* buf = static_cast<uint8_t*>(std::malloc(bytes.empty() ? 1 : bytes.size()));
    if (buf == nullptr) throw std::bad_alloc();
    std::memcpy(buf, bytes.data(), bytes.size());
    *out_bytes = buf;
    *out_len = bytes.size();
  });
}

dpbf_status dpbf_filter_deserialize(const uint8_t* bytes, size_t len, dpbf_filter** out) {
  DPBF_REQUIRE((bytes || len == 0) && out);
  return Guard([&] {
    *out = new dpbf_filter{dpbf::Dpbf::Deserialize(std::span<const std::uint8_t>(bytes, len))};
  });
}

void dpbf_bytes_free(uint8_t* bytes) { std::free(bytes); }

dpbf_status dpbf_dbf_new(uint64_t bits_per_filter, uint32_t hash_count, double target_fpr, uint64_t seed,
                         dpbf_dbf** out) {
  DPBF_REQUIRE(out);
  return Guard([&] { *out = new dpbf_dbf{dpbf::Dbf(dpbf::BloomShape{bits_per_filter, hash_count, seed}, target_fpr)}; });
}

void dpbf_dbf_free(dpbf_dbf* dbf) { delete dbf; }

dpbf_status dpbf_dbf_insert(dpbf_dbf* dbf, uint64_t id) {
  DPBF_REQUIRE(dbf);
  return Guard([&] { dbf->impl.Insert(id); });
}

dpbf_status dpbf_dbf_query(const dpbf_dbf* dbf, uint64_t id, int* out_member) {
  DPBF_REQUIRE(dbf && out_member);
  *out_member = dbf->impl.Query(id) ? 1 : 0;
  return DPBF_OK;
}

dpbf_status dpbf_dbf_theoretical_fpr(const dpbf_dbf* dbf, double* out_fpr) {
  DPBF_REQUIRE(dbf && out_fpr);
  return Guard([&] { *out_fpr = dbf->impl.TheoreticalFpr(); });
}

dpbf_status dpbf_dbf_unit_fpr(const dpbf_dbf* dbf, double* out_fpr) {
  DPBF_REQUIRE(dbf && out_fpr);
  *out_fpr = dbf->impl.UnitFpr();
  return DPBF_OK;
}

dpbf_status dpbf_dbf_filter_count(const dpbf_dbf* dbf, uint64_t* out_count) {
  DPBF_REQUIRE(dbf && out_count);
  *out_count = dbf->impl.units().size();
  return DPBF_OK;
}

dpbf_status dpbf_dbf_target_population(const dpbf_dbf* dbf, uint64_t* out_n_t) {
  DPBF_REQUIRE(dbf && out_n_t);
  *out_n_t = dbf->impl.target_population();
  return DPBF_OK;
}

const char* dpbf_csv_header(void) { return dpbf::kCsvHeader.data(); }

dpbf_status dpbf_structure_parse(const char* name, dpbf_structure* out) {
  DPBF_REQUIRE(name && out);
  return Guard([&] { *out = static_cast<dpbf_structure>(dpbf::ParseStructure(name)); });
}

dpbf_status dpbf_bench_run(const dpbf_bench_config* config, dpbf_csv_line_fn on_line, void* user) {
  DPBF_REQUIRE(config && on_line);
  DPBF_REQUIRE(config->structures || config->structure_count == 0);
  DPBF_REQUIRE(config->sizes || config->size_count == 0);
  DPBF_REQUIRE(config->seeds || config->seed_count == 0);
  return Guard([&] {
    dpbf::SweepConfig sweep;
    if (config->mode != DPBF_BENCH_FPR && config->mode != DPBF_BENCH_LATENCY) {
      dpbf::Fail(dpbf::ErrorCode::kConfig, "unknown bench mode");
    }
    sweep.mode = config->mode == DPBF_BENCH_FPR ? dpbf::SweepMode::kFpr : dpbf::SweepMode::kLatency;
    sweep.family = Family(config->universe_size, config->depth, config->hash_count, config->target_fpr);
    for (size_t i = 0; i < config->structure_count; ++i) {
      const dpbf_structure s = config->structures[i];
      if (s != DPBF_STRUCTURE_DPBF && s != DPBF_STRUCTURE_DBF && s != DPBF_STRUCTURE_SBF) {
        dpbf::Fail(dpbf::ErrorCode::kConfig, "unknown structure id");
      }
      sweep.structures.push_back(static_cast<dpbf::StructureKind>(s));
    }
    sweep.sizes.assign(config->sizes, config->sizes + config->size_count);
    sweep.seeds.assign(config->seeds, config->seeds + config->seed_count);
    sweep.probes = config->probes;
    sweep.repetitions = config->repetitions;
    sweep.Validate();
    on_line(dpbf::kCsvHeader.data(), user);
    dpbf::Sweep(sweep, [&](const dpbf::EvalRecord& r) { on_line(dpbf::CsvRow(r).c_str(), user); });
  });
}

dpbf_status dpbf_verify_dbf_bound(uint64_t universe_size, uint32_t depth, uint32_t hash_count, double target_fpr,
                                  double alpha, uint64_t probes, uint64_t seed, dpbf_bound_check* out) {
  DPBF_REQUIRE(out);
  return Guard([&] {
    const dpbf::BoundCheck c =
        dpbf::VerifyDbfBound(Family(universe_size, depth, hash_count, target_fpr), alpha, probes, seed);
    *out = {c.alpha,         c.set_size,     c.n_t,    c.bound, c.unit_bound, c.theoretical_fpr,
            c.measured_fpr,  c.probes,       c.theoretical_holds ? 1 : 0,     c.measured_holds ? 1 : 0};
  });
}

}  // extern "C"
