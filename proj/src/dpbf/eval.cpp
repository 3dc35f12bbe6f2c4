#include "dpbf/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <variant>

#include "dpbf/dbf.hpp"
#include "dpbf/engine.hpp"
#include "dpbf/error.hpp"
#include "dpbf/rng.hpp"

namespace dpbf {
namespace {

using Clock = std::chrono::steady_clock;

// Dense draws materialize the whole universe; cap that at 1 GiB of ids.
constexpr std::uint64_t kMaxDenseUniverse = std::uint64_t{1} << 27;

std::uint64_t HashSeedFor(std::uint64_t rng_seed) noexcept {
  return SplitMix64(rng_seed ^ 0xd1b54a32d192ed03ULL).Next();
}

SplitMix64 ShuffleRng(std::uint64_t rng_seed) noexcept { return SplitMix64(rng_seed ^ 0x8cb92ba72f3d8dd7ULL); }

using AnyStructure = std::variant<Dpbf, Dbf, UnitBloomFilter>;

struct Built {
  AnyStructure structure;
  std::uint64_t n_t = 0;
  double build_ms = 0.0;
};

Built Build(StructureKind kind, const FamilyConfig& family, const Workload& workload) {
  const FilterParams params = FilterParams::Make(family.universe_size, family.depth, family.hash_count,
                                                 family.target_fpr, HashSeedFor(workload.rng_seed));
  const auto start = Clock::now();
  Built out{UnitBloomFilter(params.shape()), 0, 0.0};
  switch (kind) {
    case StructureKind::kDpbf: {
      Dpbf f(params);
      for (const std::uint64_t id : workload.member_set) f.Insert(id);
      out.n_t = params.target_population;
      out.structure = std::move(f);
      break;
    }
    case StructureKind::kDbf: {
      Dbf f = Dbf::FromParams(params);
      for (const std::uint64_t id : workload.member_set) f.Insert(id);
      out.n_t = f.target_population();
      out.structure = std::move(f);
      break;
    }
    case StructureKind::kSbf: {
      const std::uint64_t n = std::max<std::uint64_t>(workload.member_set.size(), 1);
      UnitBloomFilter f(BloomShape{SizeFor(n, family.hash_count, family.target_fpr), family.hash_count,
                                   params.hash_seed});
      for (const std::uint64_t id : workload.member_set) f.Insert(id);
      out.n_t = PopulationFor(f.bit_count(), family.hash_count, family.target_fpr);
      out.structure = std::move(f);
      break;
    }
  }
  out.build_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return out;
}

std::uint64_t CountPositives(const AnyStructure& s, const std::vector<std::uint64_t>& ids) {
  return std::visit(
      [&](const auto& f) {
        std::uint64_t hits = 0;
        for (const std::uint64_t id : ids) hits += f.Query(id) ? 1 : 0;
        return hits;
      },
      s);
}

EvalRecord BaseRecord(StructureKind kind, const FamilyConfig& family, const Workload& workload, const Built& b) {
  EvalRecord r;
  r.structure_name = std::string(StructureName(kind));
  r.set_size = workload.member_set.size();
  r.target_fpr = family.target_fpr;
  r.build_ms = b.build_ms;
  r.alpha = static_cast<double>(r.set_size) / static_cast<double>(b.n_t);
  r.theorem_lower_bound = FprLowerBound(r.set_size, b.n_t, family.target_fpr);
  r.rng_seed = workload.rng_seed;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Dpbf>) {
          const DpbfStats st = f.Stats();
          r.total_bits = st.total_bits;
          r.unit_filter_count = st.unit_filter_count;
        } else if constexpr (std::is_same_v<T, Dbf>) {
          r.total_bits = f.total_bits();
          r.unit_filter_count = f.units().size();
        } else {
          r.total_bits = f.bit_count();
          r.unit_filter_count = 1;
        }
      },
      b.structure);
  return r;
}

void CheckNoFalseNegatives(const Built& b, const Workload& workload, StructureKind kind) {
  if (CountPositives(b.structure, workload.member_set) != workload.member_set.size()) {
    throw std::logic_error("false negative in " + std::string(StructureName(kind)));
  }
}

void FillFpr(EvalRecord& r, std::uint64_t false_positives, std::uint64_t probes) {
  r.probes = probes;
  r.false_positives = false_positives;
  r.measured_fpr = probes == 0 ? 0.0 : static_cast<double>(false_positives) / static_cast<double>(probes);
  r.fpr_band = probes == 0 ? 0.0 : 3.0 * std::sqrt(r.measured_fpr * (1.0 - r.measured_fpr) / static_cast<double>(probes));
}

}  // namespace

Workload GenerateWorkload(std::uint64_t seed, std::uint64_t universe_size, std::uint64_t set_size,
                          std::uint64_t probe_count) {
  if (set_size > universe_size || probe_count > universe_size - set_size) {
    Fail(ErrorCode::kCapacity, "set size plus probe count exceeds the universe");
  }
  const std::uint64_t total = set_size + probe_count;
  SplitMix64 rng(seed);
  std::vector<std::uint64_t> drawn;
  drawn.reserve(total);
  if (total <= universe_size / 2) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(total);
    while (drawn.size() < total) {
      const std::uint64_t id = rng.Below(universe_size);
      if (seen.insert(id).second) drawn.push_back(id);
    }
  } else {
    if (universe_size > kMaxDenseUniverse) Fail(ErrorCode::kCapacity, "dense draw over a universe this large");
    std::vector<std::uint64_t> pool(universe_size);
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    for (std::uint64_t i = 0; i < total; ++i) {
      std::swap(pool[i], pool[i + rng.Below(universe_size - i)]);
      drawn.push_back(pool[i]);
    }
  }
  Workload w;
  w.rng_seed = seed;
  w.universe_size = universe_size;
  w.member_set.assign(drawn.begin(), drawn.begin() + static_cast<std::ptrdiff_t>(set_size));
  w.probe_set.assign(drawn.begin() + static_cast<std::ptrdiff_t>(set_size), drawn.end());
  return w;
}

std::string_view StructureName(StructureKind kind) noexcept {
  switch (kind) {
    case StructureKind::kDpbf:
      return "dpbf";
    case StructureKind::kDbf:
      return "dbf";
    case StructureKind::kSbf:
      return "sbf";
  }
  return "?";
}

StructureKind ParseStructure(std::string_view name) {
  for (const auto kind : {StructureKind::kDpbf, StructureKind::kDbf, StructureKind::kSbf}) {
    if (StructureName(kind) == name) return kind;
  }
  Fail(ErrorCode::kConfig, "unknown structure '" + std::string(name) + "' (expected dpbf, dbf or sbf)");
}

EvalRecord MeasureFpr(StructureKind kind, const FamilyConfig& family, const Workload& workload) {
  const Built b = Build(kind, family, workload);
  CheckNoFalseNegatives(b, workload, kind);
  EvalRecord r = BaseRecord(kind, family, workload, b);
  const auto start = Clock::now();
  const std::uint64_t fp = CountPositives(b.structure, workload.probe_set);
  const double ns = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
  FillFpr(r, fp, workload.probe_set.size());
  r.timed_queries = workload.probe_set.size();
  r.mean_query_ns = r.timed_queries == 0 ? 0.0 : ns / static_cast<double>(r.timed_queries);
  return r;
}

EvalRecord MeasureLatency(StructureKind kind, const FamilyConfig& family, const Workload& workload,
                          std::uint32_t repetitions) {
  if (repetitions < 1) Fail(ErrorCode::kConfig, "repetitions must be >= 1");
  const Built b = Build(kind, family, workload);
  CheckNoFalseNegatives(b, workload, kind);
  EvalRecord r = BaseRecord(kind, family, workload, b);
  // Doubles as the warm-up pass.
  FillFpr(r, CountPositives(b.structure, workload.probe_set), workload.probe_set.size());

  std::vector<std::uint64_t> sequence;
  sequence.reserve(workload.member_set.size() + workload.probe_set.size());
  sequence.insert(sequence.end(), workload.member_set.begin(), workload.member_set.end());
  sequence.insert(sequence.end(), workload.probe_set.begin(), workload.probe_set.end());
  SplitMix64 rng = ShuffleRng(workload.rng_seed);
  for (std::size_t i = sequence.size(); i > 1; --i) std::swap(sequence[i - 1], sequence[rng.Below(i)]);

  volatile std::uint64_t sink = CountPositives(b.structure, sequence);
  double total_ns = 0.0;
  for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
    const auto start = Clock::now();
    sink = sink + CountPositives(b.structure, sequence);
    total_ns += std::chrono::duration<double, std::nano>(Clock::now() - start).count();
  }
  r.timed_queries = static_cast<std::uint64_t>(sequence.size()) * repetitions;
  r.mean_query_ns = r.timed_queries == 0 ? 0.0 : total_ns / static_cast<double>(r.timed_queries);
  return r;
}

void SweepConfig::Validate() const {
  auto bad = [](const std::string& what) { Fail(ErrorCode::kConfig, what); };
  if (structures.empty()) bad("no structures given");
  if (sizes.empty()) bad("no set sizes given");
  if (seeds.empty()) bad("no seeds given");
  if (probes < 1) bad("probes must be >= 1");
  if (repetitions < 1) bad("repetitions must be >= 1");
  if (!(family.target_fpr > 0.0 && family.target_fpr < 1.0)) bad("fpr must lie in (0, 1)");
  if (family.hash_count < 1 || family.hash_count > 255) bad("hashes must lie in [1, 255]");
  if (family.depth > 62) bad("depth must be <= 62");
  if (family.universe_size < (std::uint64_t{1} << family.depth)) bad("universe must hold at least 2^depth ids");
  for (const std::uint64_t n : sizes) {
    if (n > family.universe_size || probes > family.universe_size - n) {
      bad("set size " + std::to_string(n) + " plus probes exceeds the universe");
    }
  }
}

std::vector<EvalRecord> Sweep(const SweepConfig& config, const std::function<void(const EvalRecord&)>& on_record) {
  config.Validate();
  std::vector<EvalRecord> out;
  out.reserve(config.sizes.size() * config.seeds.size() * config.structures.size());
  for (const std::uint64_t n : config.sizes) {
    for (const std::uint64_t seed : config.seeds) {
      const Workload w = GenerateWorkload(seed, config.family.universe_size, n, config.probes);
      for (const StructureKind kind : config.structures) {
        out.push_back(config.mode == SweepMode::kFpr ? MeasureFpr(kind, config.family, w)
                                                     : MeasureLatency(kind, config.family, w, config.repetitions));
        if (on_record) on_record(out.back());
      }
    }
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(std::begin(buf), std::end(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvRow(const EvalRecord& r) {
  std::string row;
  row += r.structure_name;
  for (const std::string& field :
       {std::to_string(r.set_size), FormatDouble(r.target_fpr), FormatDouble(r.measured_fpr), std::to_string(r.probes),
        std::to_string(r.false_positives), FormatDouble(r.alpha), FormatDouble(r.theorem_lower_bound),
        FormatDouble(r.build_ms), FormatDouble(r.mean_query_ns), std::to_string(r.total_bits),
        std::to_string(r.unit_filter_count), std::to_string(r.rng_seed)}) {
    row += ',';
    row += field;
  }
  return row;
}

void WriteCsv(std::ostream& out, const std::vector<EvalRecord>& records) {
  out << kCsvHeader << '\n';
  for (const EvalRecord& r : records) out << CsvRow(r) << '\n';
}

BoundCheck VerifyDbfBound(const FamilyConfig& family, double alpha, std::uint64_t probes, std::uint64_t seed) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) Fail(ErrorCode::kConfig, "alpha must be a finite value >= 0");
  if (probes < 1) Fail(ErrorCode::kConfig, "probes must be >= 1");
  const FilterParams params =
      FilterParams::Make(family.universe_size, family.depth, family.hash_count, family.target_fpr, HashSeedFor(seed));
  Dbf dbf = Dbf::FromParams(params);

  BoundCheck c;
  c.alpha = alpha;
  c.n_t = dbf.target_population();
  c.set_size = static_cast<std::uint64_t>(std::floor(alpha * static_cast<double>(c.n_t)));
  c.probes = probes;
  const Workload w = GenerateWorkload(seed, family.universe_size, c.set_size, probes);

  c.theoretical_holds = true;
  for (const std::uint64_t id : w.member_set) {
    dbf.Insert(id);
    if (dbf.TheoreticalFpr() < FprLowerBound(dbf.total_inserts(), c.n_t, dbf.UnitFpr())) c.theoretical_holds = false;
  }
  for (const std::uint64_t id : w.member_set) {
    if (!dbf.Query(id)) throw std::logic_error("false negative in dbf");
  }
  std::uint64_t fp = 0;
  for (const std::uint64_t id : w.probe_set) fp += dbf.Query(id) ? 1 : 0;

  c.bound = FprLowerBound(c.set_size, c.n_t, family.target_fpr);
  c.unit_bound = FprLowerBound(c.set_size, c.n_t, dbf.UnitFpr());
  c.theoretical_fpr = dbf.TheoreticalFpr();
  c.measured_fpr = static_cast<double>(fp) / static_cast<double>(probes);
  c.measured_holds = c.measured_fpr >= kMeasuredBoundFactor * c.bound;
  return c;
}

}  // namespace dpbf
