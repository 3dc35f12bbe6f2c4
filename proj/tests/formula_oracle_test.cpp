#include "doctest.h"
#include "dpbf/bloom.hpp"
#include "dpbf/dbf.hpp"
#include "mpfr_oracle.hpp"

using namespace dpbf;

TEST_CASE("formulas agree with 256-bit evaluation on the grid") {
  for (const auto& [n, k, f] : oracle::Grid()) {
    CAPTURE(n);
    CAPTURE(k);
    CAPTURE(f);
    const std::uint64_t m = SizeFor(n, k, f);
    CHECK(m == oracle::SizeFor(n, k, f));
    CHECK(PopulationFor(m, k, f) == oracle::PopulationFor(m, k, f));
    CHECK(oracle::UlpDistance(EstimatedFpr(n, m, k), oracle::EstimatedFpr(n, m, k)) <= 1);
    // Partially filled filters exercise the small-x regime of the estimate.
    CHECK(oracle::UlpDistance(EstimatedFpr(n / 3 + 1, m, k), oracle::EstimatedFpr(n / 3 + 1, m, k)) <= 1);
    const std::uint64_t nt = std::max<std::uint64_t>(1, n / 4);
    CHECK(oracle::UlpDistance(FprLowerBound(n, nt, f), oracle::FprLowerBound(n, nt, f)) <= 1);
  }
}

TEST_CASE("worked values") {
  CHECK(oracle::SizeFor(1000, 7, 0.01) == 9593);
  CHECK(oracle::PopulationFor(9593, 7, 0.01) == 1000);
  CHECK(oracle::PopulationFor(2, 1, 0.5) == 1);
  CHECK(oracle::UlpDistance(FprLowerBound(3, 1, 0.01), 0.029701) <= 1);
}
