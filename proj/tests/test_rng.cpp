#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "ecd/error.hpp"
#include "ecd/parallel.hpp"
#include "ecd/rng.hpp"

using namespace ecd;

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("derive_seed is deterministic and order sensitive") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  CHECK(derive_seed(1, {}) != derive_seed(1, {0}));
}

TEST_CASE("household streams depend on every key component") {
  auto first = [](RngStream s) { return s(); };
  const auto base = first(household_stream(7, "h001", StreamPurpose::Orders, 1, 3));
  CHECK(base == first(household_stream(7, "h001", StreamPurpose::Orders, 1, 3)));
  std::set<std::uint64_t> seen{base};
  seen.insert(first(household_stream(8, "h001", StreamPurpose::Orders, 1, 3)));
  seen.insert(first(household_stream(7, "h002", StreamPurpose::Orders, 1, 3)));
  seen.insert(first(household_stream(7, "h001", StreamPurpose::Packages, 1, 3)));
  seen.insert(first(household_stream(7, "h001", StreamPurpose::Orders, 2, 3)));
  seen.insert(first(household_stream(7, "h001", StreamPurpose::Orders, 1, 4)));
  CHECK(seen.size() == 6);
}

TEST_CASE("uniform draws lie in [0, 1) with the right mean") {
  RngStream r(5);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
}

TEST_CASE("uniform_index stays in range and is roughly uniform") {
  RngStream r(6);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.uniform_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 5 * std::sqrt(10000.0 * 6 / 7));
  CHECK_THROWS_AS(r.uniform_index(0), InvalidInput);
}

TEST_CASE("poisson draws") {
  RngStream r(7);
  CHECK(r.poisson(0.0) == 0);
  CHECK_THROWS_AS(r.poisson(-1.0), InvalidInput);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(r.poisson(2.0));
  CHECK(std::abs(sum / n - 2.0) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("parallel_for results do not depend on the worker count") {
  const std::size_t n = 1000;
  std::vector<std::uint64_t> reference(n);
  parallel_for(n, 1, [&](std::size_t i) { reference[i] = derive_seed(3, {i}); });
  for (unsigned w : {2u, 4u, 16u, 64u}) {
    std::vector<std::uint64_t> out(n);
    std::atomic<std::size_t> calls{0};
    parallel_for(n, w, [&](std::size_t i) {
      out[i] = derive_seed(3, {i});
      ++calls;
    });
    CHECK(out == reference);
    CHECK(calls == n);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  CHECK_THROWS_AS(parallel_for(500, 8,
                               [](std::size_t i) {
                                 if (i == 321) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
