#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "multispin/errors.hpp"
#include "multispin/exact.hpp"
#include "test_support.hpp"

using namespace multispin;
using testing_support::half_product_system;

TEST_CASE("exact partition examples") {
  const auto s = half_product_system();
  CHECK(std::abs(exact_partition(s, cd{0, 0}) - 1.0) < 1e-15);
  CHECK(std::abs(exact_partition(s, cd{0.2, 0}) - std::cosh(0.1)) < 1e-15);
  SpinSystem empty;
  empty.spaces = {Space::uniform(3), Space::uniform(2)};
  CHECK(std::abs(exact_partition(empty, cd{1.5, -2.0}) - 1.0) < 1e-15);
  ExactOptions tiny{2.0};
  CHECK_THROWS_AS(exact_partition(s, cd{0.1, 0}, tiny), BudgetError);
}

TEST_CASE("exact partition matches the reference walk") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = testing_support::random_system(rng, {});
    const cd lambda{0.3, -0.4};
    CHECK(testing_support::relative_gap(exact_partition(s, lambda), testing_support::brute_partition(s, lambda)) <
          1e-12);
    PartitionFunction pf(s);
    const auto vd = pf.evaluate(lambda);
    CHECK(testing_support::relative_gap(vd.value, testing_support::brute_partition(s, lambda)) < 1e-12);
    const double h = 1e-5;
    const cd fd = (pf.value(lambda + h) - pf.value(lambda - h)) / (2.0 * h);
    CHECK(std::abs(fd - vd.derivative) < 1e-7 * std::max(1.0, std::abs(vd.derivative)));
  }
}

TEST_CASE("winding numbers") {
  SpinSystem empty;
  empty.spaces = {Space::uniform(2)};
  CHECK(winding_number(empty, cd{0, 0}, 3.0, 64) == 0);
  const auto s = half_product_system();
  CHECK(winding_number(s, cd{0, std::numbers::pi}, 0.5, 64) == 1);
  CHECK(winding_number(s, cd{0, 0}, 1.0, 64) == 0);
  CHECK_THROWS_AS(winding_number(s, cd{0, std::numbers::pi}, 0.0, 64), DomainError);
  CHECK_THROWS(winding_number(s, cd{0, 0}, std::numbers::pi, 64));
}

TEST_CASE("scan finds the zero of cosh(z / 2)") {
  const auto s = half_product_system();
  const auto report = scan_zeros(s, 4.0, 64);
  REQUIRE(report.min_modulus_zero.has_value());
  CHECK(std::abs(*report.min_modulus_zero - cd{0, std::numbers::pi}) < 1e-8);
  CHECK(report.zeros.size() == 2);
  for (const auto& z : report.zeros) CHECK(z.residual <= 1e-8 * report.grid_max);
  CHECK(report.consistent);
}

TEST_CASE("scan of a constant function finds nothing") {
  SpinSystem empty;
  empty.spaces = {Space::uniform(2)};
  const auto report = scan_zeros(empty, 2.0, 16);
  CHECK(report.zeros.empty());
  CHECK(report.consistent);
}

TEST_CASE("random admissible systems are zero free on the closed disc") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const auto s = testing_support::random_system(rng, {});
    const double radius = zero_free_radius(s.arity(), s.multiplicity());
    const auto report = scan_zeros(s, radius, 12);
    CHECK(report.zeros.empty());
    CHECK(report.consistent);
    for (const auto& w : report.winding_evidence) CHECK(w.winding == 0);
  }
}

TEST_CASE("polish respects the region") {
  const auto s = half_product_system();
  PartitionFunction pf(s);
  auto [zero, ok] = polish_zero(pf.as_function(), cd{0.1, 3.0}, 1e-12, 50);
  CHECK(ok);
  CHECK(std::abs(zero.z - cd{0, std::numbers::pi}) < 1e-10);
}
