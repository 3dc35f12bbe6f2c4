// dpbf command-line tool. Talks to the library only through the C API.
//
// Exit codes:
//   0 success
//   1 malformed input line or invalid flags/config
//   2 id outside the universe
//   3 I/O failure or unreadable/corrupt filter file
//   4 parameter mismatch between combined filters
//   5 DBF lower bound violated (implementation bug)

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "dpbf/dpbf.h"

namespace {

enum ExitCode : int {
  kOk = 0,
  kBadInput = 1,
  kOutOfUniverse = 2,
  kIoFailure = 3,
  kMismatch = 4,
  kBoundViolated = 5,
};

struct ExitError {
  int code;
  std::string message;
};

struct FilterDeleter {
  void operator()(dpbf_filter* f) const noexcept { dpbf_filter_free(f); }
};
using FilterPtr = std::unique_ptr<dpbf_filter, FilterDeleter>;

int ExitFor(dpbf_status status) {
  switch (status) {
    case DPBF_OK:
      return kOk;
    case DPBF_ERR_OUT_OF_UNIVERSE:
      return kOutOfUniverse;
    case DPBF_ERR_PARAM_MISMATCH:
      return kMismatch;
    case DPBF_ERR_CORRUPT_PAYLOAD:
    case DPBF_ERR_IO:
      return kIoFailure;
    default:
      return kBadInput;
  }
}

void Check(dpbf_status status, std::string_view context) {
  if (status != DPBF_OK) throw ExitError{ExitFor(status), std::string(context) + ": " + dpbf_last_error()};
}

std::string Shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(std::begin(buf), std::end(buf), v);
  return std::string(buf, res.ptr);
}

// One decimal id per line; blank lines and '#' comments are skipped.
template <typename Fn>
void ForEachId(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ExitError{kIoFailure, "cannot open " + path};
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    text = text.substr(first, text.find_last_not_of(" \t\r") - first + 1);
    std::uint64_t id = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ExitError{kBadInput, path + ":" + std::to_string(line_no) + ": malformed id '" + std::string(text) + "'"};
    }
    fn(id, line_no);
  }
  if (in.bad()) throw ExitError{kIoFailure, "read error on " + path};
}

std::vector<std::uint8_t> ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExitError{kIoFailure, "cannot open " + path};
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw ExitError{kIoFailure, "read error on " + path};
  return bytes;
}

FilterPtr LoadFilter(const std::string& path) {
  const std::vector<std::uint8_t> bytes = ReadAll(path);
  dpbf_filter* raw = nullptr;
  const dpbf_status st = dpbf_filter_deserialize(bytes.data(), bytes.size(), &raw);
  if (st != DPBF_OK) throw ExitError{kIoFailure, path + ": " + dpbf_last_error()};
  return FilterPtr(raw);
}

void SaveFilter(const dpbf_filter* filter, const std::string& path) {
  std::uint8_t* bytes = nullptr;
  std::size_t len = 0;
  Check(dpbf_filter_serialize(filter, &bytes, &len), "serialize");
  std::unique_ptr<std::uint8_t, void (*)(std::uint8_t*)> owned(bytes, dpbf_bytes_free);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExitError{kIoFailure, "cannot create " + path};
  out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(len));
  out.close();
  if (!out) throw ExitError{kIoFailure, "write error on " + path};
}

void PrintStats(const dpbf_filter* filter) {
  dpbf_params p{};
  dpbf_stats st{};
  Check(dpbf_filter_get_params(filter, &p), "params");
  Check(dpbf_filter_get_stats(filter, &st), "stats");
  std::cout << "universe_size=" << p.universe_size << '\n'
            << "depth=" << p.depth << '\n'
            << "hash_count=" << p.hash_count << '\n'
            << "target_fpr=" << Shortest(p.target_fpr) << '\n'
            << "bits_per_filter=" << p.bits_per_filter << '\n'
            << "target_population=" << p.target_population << '\n'
            << "s=" << st.s << '\n'
            << "cpbpt_leaf_count=" << st.cpbpt_leaf_count << '\n'
            << "populated_leaf_count=" << st.populated_leaf_count << '\n'
            << "unit_filter_count=" << st.unit_filter_count << '\n'
            << "total_bits=" << st.total_bits << '\n'
            << "inserted=" << st.inserted << '\n'
            << "estimated_fpr_max=" << Shortest(st.estimated_fpr_max) << '\n';
}

const auto kOpenUnit = CLI::Validator(
    [](std::string& in) -> std::string {
      double v = 0;
      try {
        v = std::stod(in);
      } catch (...) {
        return "not a number: " + in;
      }
      return (v > 0.0 && v < 1.0) ? std::string() : "value must lie in (0, 1): " + in;
    },
    "(0,1)", "OPEN_UNIT");

struct FamilyFlags {
  std::uint64_t universe = std::uint64_t{1} << 24;
  std::uint32_t depth = 14;
  std::uint32_t hashes = 7;
  double fpr = 1e-2;

  void Attach(CLI::App* cmd) {
    cmd->add_option("--universe", universe, "Namespace size |U|")->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
    cmd->add_option("--depth", depth, "Partition tree depth d")->check(CLI::Range(0U, 62U));
    cmd->add_option("--hashes", hashes, "Hash functions per filter k")->check(CLI::Range(1U, 255U));
    cmd->add_option("--fpr", fpr, "Target false-positive rate f")->check(kOpenUnit);
  }
};

int RunBuild(const FamilyFlags& fam, std::uint64_t seed, const std::string& input, const std::string& out) {
  dpbf_filter* raw = nullptr;
  Check(dpbf_filter_new(fam.universe, fam.depth, fam.hashes, fam.fpr, seed, &raw), "create");
  FilterPtr filter(raw);
  ForEachId(input, [&](std::uint64_t id, std::uint64_t line_no) {
    const dpbf_status st = dpbf_filter_insert(filter.get(), id);
    if (st != DPBF_OK) {
      throw ExitError{ExitFor(st), input + ":" + std::to_string(line_no) + ": " + dpbf_last_error()};
    }
  });
  SaveFilter(filter.get(), out);
  PrintStats(filter.get());
  return kOk;
}

int RunQuery(const std::string& filter_path, const std::string& keys) {
  const FilterPtr filter = LoadFilter(filter_path);
  ForEachId(keys, [&](std::uint64_t id, std::uint64_t line_no) {
    int member = 0;
    const dpbf_status st = dpbf_filter_query(filter.get(), id, &member);
    if (st != DPBF_OK) {
      throw ExitError{ExitFor(st), keys + ":" + std::to_string(line_no) + ": " + dpbf_last_error()};
    }
    std::cout << id << '\t' << (member != 0 ? "true" : "false") << '\n';
  });
  return kOk;
}

int RunCombine(bool is_union, const std::string& a_path, const std::string& b_path, const std::string& out) {
  const FilterPtr a = LoadFilter(a_path);
  const FilterPtr b = LoadFilter(b_path);
  dpbf_filter* raw = nullptr;
  Check(is_union ? dpbf_filter_union(a.get(), b.get(), &raw) : dpbf_filter_intersect(a.get(), b.get(), &raw),
        is_union ? "union" : "intersect");
  FilterPtr combined(raw);
  SaveFilter(combined.get(), out);
  PrintStats(combined.get());
  return kOk;
}

struct BenchFlags {
  std::string mode;
  FamilyFlags family;
  std::vector<std::string> structures{"dpbf", "dbf", "sbf"};
  std::vector<std::uint64_t> sizes{100, 1000, 10000, 100000};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint64_t probes = 1'000'000;
  std::uint32_t repetitions = 3;
  bool full_scale = false;
  std::string out;
};

void WriteLine(const char* line, void* user) {
  auto* os = static_cast<std::ostream*>(user);
  *os << line << '\n';
}

int RunBench(BenchFlags flags) {
  if (flags.full_scale) {
    flags.family.fpr = 1e-4;
    flags.probes = 10'000'000;
  }
  std::vector<dpbf_structure> structures;
  for (const std::string& name : flags.structures) {
    dpbf_structure s{};
    Check(dpbf_structure_parse(name.c_str(), &s), "--structures");
    structures.push_back(s);
  }
  dpbf_bench_config cfg{};
  cfg.mode = flags.mode == "fpr" ? DPBF_BENCH_FPR : DPBF_BENCH_LATENCY;
  cfg.universe_size = flags.family.universe;
  cfg.depth = flags.family.depth;
  cfg.hash_count = flags.family.hashes;
  cfg.target_fpr = flags.family.fpr;
  cfg.structures = structures.data();
  cfg.structure_count = structures.size();
  cfg.sizes = flags.sizes.data();
  cfg.size_count = flags.sizes.size();
  cfg.seeds = flags.seeds.data();
  cfg.seed_count = flags.seeds.size();
  cfg.probes = flags.probes;
  cfg.repetitions = flags.repetitions;

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!flags.out.empty()) {
    file.open(flags.out, std::ios::trunc);
    if (!file) throw ExitError{kIoFailure, "cannot create " + flags.out};
    os = &file;
  }
  Check(dpbf_bench_run(&cfg, WriteLine, os), "bench");
  os->flush();
  if (!*os) throw ExitError{kIoFailure, "write error on " + (flags.out.empty() ? "stdout" : flags.out)};
  return kOk;
}

int RunVerify(const FamilyFlags& fam, const std::vector<double>& alphas, std::uint64_t probes, std::uint64_t seed) {
  bool ok = true;
  std::cout << "alpha\tset_size\tn_t\tbound\tmeasured_fpr\ttheoretical_fpr\tunit_bound\tresult\n";
  for (const double alpha : alphas) {
    dpbf_bound_check c{};
    Check(dpbf_verify_dbf_bound(fam.universe, fam.depth, fam.hashes, fam.fpr, alpha, probes, seed, &c), "verify");
    const bool pass = c.theoretical_holds != 0 && c.measured_holds != 0;
    ok = ok && pass;
    std::cout << Shortest(c.alpha) << '\t' << c.set_size << '\t' << c.n_t << '\t' << Shortest(c.bound) << '\t'
              << Shortest(c.measured_fpr) << '\t' << Shortest(c.theoretical_fpr) << '\t' << Shortest(c.unit_bound)
              << '\t' << (pass ? "pass" : "FAIL") << '\n';
  }
  if (!ok) std::cerr << "dbf lower bound violated\n";
  return ok ? kOk : kBoundViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic partition Bloom filters: build, query, combine and benchmark"};
  app.set_config("--config", "", "key = value file with default flag values (flags win)");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Hash/RNG seed")->envname("DPBF_SEED");
  };

  FamilyFlags build_family;
  std::string build_input, build_out;
  auto* build = app.add_subcommand("build", "Build a filter from a file of ids");
  build_family.Attach(build);
  add_seed(build);
  build->add_option("--input", build_input, "One decimal id per line")->required();
  build->add_option("--out", build_out, "Serialized filter output")->required();

  std::string query_filter, query_keys;
  auto* query = app.add_subcommand("query", "Query ids against a filter (id<TAB>true|false)");
  query->add_option("--filter", query_filter)->required();
  query->add_option("--keys", query_keys)->required();

  std::string combine_a, combine_b, combine_out;
  auto* uni = app.add_subcommand("union", "Union of two filters");
  auto* inter = app.add_subcommand("intersect", "Intersection of two filters");
  for (auto* cmd : {uni, inter}) {
    cmd->add_option("a", combine_a, "First filter")->required();
    cmd->add_option("b", combine_b, "Second filter")->required();
    cmd->add_option("--out", combine_out)->required();
  }

  std::string stats_filter;
  auto* stats = app.add_subcommand("stats", "Print key=value statistics of a filter");
  stats->add_option("--filter", stats_filter)->required();

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Sweep structures x sizes x seeds and write CSV");
  bench->add_option("mode", bench_flags.mode, "fpr or latency")->required()->check(CLI::IsMember({"fpr", "latency"}));
  bench_flags.family.Attach(bench);
  bench->add_option("--structures", bench_flags.structures, "Subset of dpbf,dbf,sbf")->delimiter(',');
  bench->add_option("--sizes", bench_flags.sizes, "Set sizes")->delimiter(',');
  bench->add_option("--seeds", bench_flags.seeds, "Workload seeds")->delimiter(',');
  bench->add_option("--probes", bench_flags.probes, "Non-member probes per point")
      ->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
  bench->add_option("--repetitions", bench_flags.repetitions, "Timed passes (latency mode)")
      ->check(CLI::Range(1U, 1'000'000U));
  bench->add_flag("--full-scale", bench_flags.full_scale, "f = 1e-4 with 1e7 probes (slow)");
  bench->add_option("--out", bench_flags.out, "CSV path (default stdout)");

  FamilyFlags verify_family;
  std::vector<double> verify_alphas{0.5, 1, 4, 16, 64};
  std::uint64_t verify_probes = 1'000'000;
  auto* verify = app.add_subcommand("verify-dbf-bound", "Check measured DBF fpr against 1-(1-f)^floor(alpha)");
  verify_family.Attach(verify);
  verify->add_option("--alphas", verify_alphas, "Load factors |A|/n_t")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1e9));
  verify->add_option("--probes", verify_probes)->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
  add_seed(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*build) return RunBuild(build_family, seed, build_input, build_out);
    if (*query) return RunQuery(query_filter, query_keys);
    if (*uni) return RunCombine(true, combine_a, combine_b, combine_out);
    if (*inter) return RunCombine(false, combine_a, combine_b, combine_out);
    if (*stats) {
      PrintStats(LoadFilter(stats_filter).get());
      return kOk;
    }
    if (*bench) return RunBench(bench_flags);
    if (*verify) return RunVerify(verify_family, verify_alphas, verify_probes, seed);
  } catch (const ExitError& e) {
    std::cout.flush();
    std::cerr << "dpbf: " << e.message << '\n';
    return e.code;
  }
  return kBadInput;
}
