#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dpbf/bloom.hpp"

namespace dpbf {

struct Workload {
  std::uint64_t rng_seed = 0;
  std::uint64_t universe_size = 0;
  std::vector<std::uint64_t> member_set;  // distinct, in draw order
  std::vector<std::uint64_t> probe_set;   // distinct, disjoint from member_set
};

// Draws set_size + probe_count distinct ids uniformly from [0, universe_size);
// the first set_size become members. Throws kCapacity if they do not fit.
Workload GenerateWorkload(std::uint64_t seed, std::uint64_t universe_size, std::uint64_t set_size,
                          std::uint64_t probe_count);

enum class StructureKind { kDpbf, kDbf, kSbf };

std::string_view StructureName(StructureKind kind) noexcept;
// Throws kConfig on an unknown name.
StructureKind ParseStructure(std::string_view name);

// Parameters shared by every structure in one experiment. DPBF and DBF use the
// unit filters of FilterParams::Make(universe, depth, hashes, fpr, seed); the
// SBF is a single filter sized for the whole set.
struct FamilyConfig {
  std::uint64_t universe_size = std::uint64_t{1} << 24;
  std::uint32_t depth = 14;
  std::uint32_t hash_count = 7;
  double target_fpr = 1e-2;
};

struct EvalRecord {
  std::string structure_name;
  std::uint64_t set_size = 0;
  double target_fpr = 0.0;
  double measured_fpr = 0.0;
  std::uint64_t probes = 0;
  std::uint64_t false_positives = 0;
  double build_ms = 0.0;
  double mean_query_ns = 0.0;
  std::uint64_t total_bits = 0;
  std::uint64_t unit_filter_count = 0;
  double alpha = 0.0;
  double theorem_lower_bound = 0.0;
  std::uint64_t rng_seed = 0;
  // Binomial 3-sigma half-width around measured_fpr; not part of the CSV.
  double fpr_band = 0.0;
  std::uint64_t timed_queries = 0;
};

// Builds the structure from the member set, checks every member answers true
// (throws otherwise), then queries every probe.
EvalRecord MeasureFpr(StructureKind kind, const FamilyConfig& family, const Workload& workload);

// Mean wall-clock per query over members and probes interleaved in a shuffled
// order: one warm-up pass, then `repetitions` timed passes.
EvalRecord MeasureLatency(StructureKind kind, const FamilyConfig& family, const Workload& workload,
                          std::uint32_t repetitions);

enum class SweepMode { kFpr, kLatency };

struct SweepConfig {
  SweepMode mode = SweepMode::kFpr;
  FamilyConfig family;
  std::vector<StructureKind> structures;
  std::vector<std::uint64_t> sizes;
  std::vector<std::uint64_t> seeds;
  std::uint64_t probes = 1'000'000;
  std::uint32_t repetitions = 3;

  // Throws kConfig naming the first bad field.
  void Validate() const;
};

// structures x sizes x seeds in that nesting order (seed varies fastest).
std::vector<EvalRecord> Sweep(const SweepConfig& config,
                              const std::function<void(const EvalRecord&)>& on_record = {});

inline constexpr std::string_view kCsvHeader =
    "structure,set_size,target_fpr,measured_fpr,probes,false_positives,alpha,theorem_lower_bound,build_ms,"
    "mean_query_ns,total_bits,unit_filter_count,rng_seed";

// Shortest decimal that round-trips to the same double.
std::string FormatDouble(double v);
std::string CsvRow(const EvalRecord& r);
void WriteCsv(std::ostream& out, const std::vector<EvalRecord>& records);

// One point of the DBF lower-bound verification.
struct BoundCheck {
  double alpha = 0.0;
  std::uint64_t set_size = 0;
  std::uint64_t n_t = 0;
  double bound = 0.0;             // 1 - (1 - f)^floor(alpha), nominal f
  double unit_bound = 0.0;        // same with f = the units' own estimated fpr
  double theoretical_fpr = 0.0;
  double measured_fpr = 0.0;
  std::uint64_t probes = 0;
  bool theoretical_holds = false;  // theoretical >= unit bound at every insert
  bool measured_holds = false;     // measured >= 0.7 * bound
};

inline constexpr double kMeasuredBoundFactor = 0.7;

BoundCheck VerifyDbfBound(const FamilyConfig& family, double alpha, std::uint64_t probes, std::uint64_t seed);

}  // namespace dpbf
