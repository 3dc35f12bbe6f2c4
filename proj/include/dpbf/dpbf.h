/*
 * libdpbf C API.
 *
 * Dynamic partition Bloom filters: a tree of fixed-size Bloom filters over a
 * partitioned integer namespace that keeps the false-positive rate of every
 * leaf filter at or below a target while the stored set grows without bound.
 * The library also carries the dynamic Bloom filter (list-of-filters)
 * baseline and the benchmark harness that compares the two.
 *
 * Conventions:
 *   - Every fallible call returns dpbf_status; DPBF_OK is zero. On failure the
 *     out-parameters are left untouched and dpbf_last_error() describes the
 *     problem (thread-local, valid until the next failing call on the thread).
 *   - Handles are opaque. Objects returned through an out-parameter are owned
 *     by the caller and released with the matching *_free function.
 *   - A handle may be queried from many threads at once while no thread
 *     mutates it. Mutation needs exclusive access.
 */
#ifndef DPBF_DPBF_H_
#define DPBF_DPBF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DPBF_BUILDING_LIBRARY)
#define DPBF_API __declspec(dllexport)
#else
#define DPBF_API __declspec(dllimport)
#endif
#elif defined(__GNUC__) || defined(__clang__)
#define DPBF_API __attribute__((visibility("default")))
#else
#define DPBF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpbf_status {
  DPBF_OK = 0,
  DPBF_ERR_INVALID_PARAMETER = 1,
  DPBF_ERR_OVERFLOW = 2,
  DPBF_ERR_OUT_OF_UNIVERSE = 3,
  DPBF_ERR_PARAM_MISMATCH = 4,
  DPBF_ERR_CORRUPT_PAYLOAD = 5,
  DPBF_ERR_CAPACITY = 6,
  DPBF_ERR_CONFIG = 7,
  DPBF_ERR_IO = 8,
  DPBF_ERR_NO_MEMORY = 9,
  DPBF_ERR_INTERNAL = 10
} dpbf_status;

DPBF_API const char* dpbf_status_name(dpbf_status status);
DPBF_API const char* dpbf_last_error(void);

/* ---- sizing formulas ---------------------------------------------------- */

/* ceil(-n*k / ln(1 - f^(1/k))) */
DPBF_API dpbf_status dpbf_size_for(uint64_t n, uint32_t k, double f, uint64_t* out_bits);
/* floor(-(m/k) * ln(1 - f^(1/k))) */
DPBF_API dpbf_status dpbf_population_for(uint64_t m, uint32_t k, double f, uint64_t* out_n);
/* (1 - e^(-nk/m))^k */
DPBF_API dpbf_status dpbf_estimated_fpr(uint64_t n, uint64_t m, uint32_t k, double* out_fpr);
/* 1 - (1 - f_t)^floor(set_size / n_t) */
DPBF_API dpbf_status dpbf_fpr_lower_bound(uint64_t set_size, uint64_t n_t, double f_t, double* out_fpr);

/* ---- dynamic partition Bloom filter ------------------------------------ */

typedef struct dpbf_filter dpbf_filter;

typedef struct dpbf_params {
  uint64_t universe_size; /* padded up to a multiple of 2^depth */
  uint32_t depth;
  uint32_t hash_count;
  double target_fpr;
  uint64_t bits_per_filter;
  uint64_t target_population; /* universe_size / 2^depth */
  uint64_t hash_seed;
} dpbf_params;

typedef struct dpbf_stats {
  uint64_t s; /* leaf-level populated filters (map entries) */
  uint64_t cpbpt_leaf_count;
  uint64_t populated_leaf_count;
  uint64_t internal_node_count;
  uint64_t unit_filter_count; /* s + populated_leaf_count */
  uint64_t total_bits;        /* unit_filter_count * bits_per_filter */
  uint64_t inserted;          /* counted inserts at the root */
  double estimated_fpr_max;
} dpbf_stats;

typedef struct dpbf_leaf {
  uint32_t level;
  uint64_t index;
  uint64_t count;
  int populated;
} dpbf_leaf;

typedef struct dpbf_unit {
  uint64_t leaf_index;
  uint64_t insert_count;
} dpbf_unit;

DPBF_API dpbf_status dpbf_filter_new(uint64_t universe_size, uint32_t depth, uint32_t hash_count, double target_fpr,
                                     uint64_t seed, dpbf_filter** out);
DPBF_API void dpbf_filter_free(dpbf_filter* filter);
DPBF_API dpbf_status dpbf_filter_clone(const dpbf_filter* filter, dpbf_filter** out);

DPBF_API dpbf_status dpbf_filter_insert(dpbf_filter* filter, uint64_t id);
/* *out_member is 1 when id may be in the set, 0 when it is certainly not. */
DPBF_API dpbf_status dpbf_filter_query(const dpbf_filter* filter, uint64_t id, int* out_member);

/* Both inputs must share identical params, seed included. */
DPBF_API dpbf_status dpbf_filter_union(const dpbf_filter* a, const dpbf_filter* b, dpbf_filter** out);
DPBF_API dpbf_status dpbf_filter_intersect(const dpbf_filter* a, const dpbf_filter* b, dpbf_filter** out);

DPBF_API dpbf_status dpbf_filter_get_params(const dpbf_filter* filter, dpbf_params* out);
DPBF_API dpbf_status dpbf_filter_get_stats(const dpbf_filter* filter, dpbf_stats* out);

/* Copy up to `capacity` records into `out` (which may be NULL when capacity
 * is 0); *out_count always receives the total available. Leaves come in
 * left-to-right order, units in ascending leaf index. */
DPBF_API dpbf_status dpbf_filter_leaves(const dpbf_filter* filter, dpbf_leaf* out, size_t capacity,
                                        size_t* out_count);
DPBF_API dpbf_status dpbf_filter_units(const dpbf_filter* filter, dpbf_unit* out, size_t capacity,
                                       size_t* out_count);

/* Full structural audit; DPBF_ERR_CORRUPT_PAYLOAD names the broken invariant. */
DPBF_API dpbf_status dpbf_filter_check(const dpbf_filter* filter);

/* Wire format, little-endian: "DPBF", version 0x01, universe_size u64,
 * depth u8, hash_count u8, target_fpr f64, bits_per_filter u64, hash_seed u64,
 * entry count u64, then per entry (ascending leaf index): leaf_index u64,
 * insert_count u64, ceil(m/8) bytes of bits (bit j in byte j/8, bit j%8). */
DPBF_API dpbf_status dpbf_filter_serialize(const dpbf_filter* filter, uint8_t** out_bytes, size_t* out_len);
DPBF_API dpbf_status dpbf_filter_deserialize(const uint8_t* bytes, size_t len, dpbf_filter** out);
DPBF_API void dpbf_bytes_free(uint8_t* bytes);

/* ---- dynamic Bloom filter baseline ------------------------------------- */

typedef struct dpbf_dbf dpbf_dbf;

/* Units hold n_t = population_for(bits_per_filter, hash_count, target_fpr). */
DPBF_API dpbf_status dpbf_dbf_new(uint64_t bits_per_filter, uint32_t hash_count, double target_fpr, uint64_t seed,
                                  dpbf_dbf** out);
DPBF_API void dpbf_dbf_free(dpbf_dbf* dbf);
DPBF_API dpbf_status dpbf_dbf_insert(dpbf_dbf* dbf, uint64_t id);
DPBF_API dpbf_status dpbf_dbf_query(const dpbf_dbf* dbf, uint64_t id, int* out_member);
DPBF_API dpbf_status dpbf_dbf_theoretical_fpr(const dpbf_dbf* dbf, double* out_fpr);
DPBF_API dpbf_status dpbf_dbf_unit_fpr(const dpbf_dbf* dbf, double* out_fpr);
DPBF_API dpbf_status dpbf_dbf_filter_count(const dpbf_dbf* dbf, uint64_t* out_count);
DPBF_API dpbf_status dpbf_dbf_target_population(const dpbf_dbf* dbf, uint64_t* out_n_t);

/* ---- benchmark harness -------------------------------------------------- */

typedef enum dpbf_bench_mode { DPBF_BENCH_FPR = 0, DPBF_BENCH_LATENCY = 1 } dpbf_bench_mode;
typedef enum dpbf_structure { DPBF_STRUCTURE_DPBF = 0, DPBF_STRUCTURE_DBF = 1, DPBF_STRUCTURE_SBF = 2 } dpbf_structure;

typedef struct dpbf_bench_config {
  dpbf_bench_mode mode;
  uint64_t universe_size;
  uint32_t depth;
  uint32_t hash_count;
  double target_fpr;
  const dpbf_structure* structures;
  size_t structure_count;
  const uint64_t* sizes;
  size_t size_count;
  const uint64_t* seeds;
  size_t seed_count;
  uint64_t probes;
  uint32_t repetitions; /* latency mode only */
} dpbf_bench_config;

/* Receives one CSV line (no trailing newline) per call. */
typedef void (*dpbf_csv_line_fn)(const char* line, void* user);

/* "structure,set_size,...,rng_seed" */
DPBF_API const char* dpbf_csv_header(void);
DPBF_API dpbf_status dpbf_structure_parse(const char* name, dpbf_structure* out);

/* Runs sizes x seeds x structures, streaming the header and then one row per
 * measurement to on_line. */
DPBF_API dpbf_status dpbf_bench_run(const dpbf_bench_config* config, dpbf_csv_line_fn on_line, void* user);

typedef struct dpbf_bound_check {
  double alpha;
  uint64_t set_size;
  uint64_t n_t;
  double bound;      /* 1 - (1 - f)^floor(alpha) */
  double unit_bound; /* same with f replaced by the units' estimated fpr */
  double theoretical_fpr;
  double measured_fpr;
  uint64_t probes;
  int theoretical_holds; /* theoretical >= unit_bound after every insert */
  int measured_holds;    /* measured >= 0.7 * bound */
} dpbf_bound_check;

/* Builds a DBF from alpha * n_t random ids and measures it on `probes`
 * disjoint non-members. */
DPBF_API dpbf_status dpbf_verify_dbf_bound(uint64_t universe_size, uint32_t depth, uint32_t hash_count,
                                           double target_fpr, double alpha, uint64_t probes, uint64_t seed,
                                           dpbf_bound_check* out);

#ifdef __cplusplus
}
#endif

#endif /* DPBF_DPBF_H_ */
