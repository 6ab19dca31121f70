#include <doctest.h>

#include <cmath>
#include <numbers>

#include "multispin/errors.hpp"
#include "multispin/exact.hpp"
#include "multispin/spin_system.hpp"
#include "test_support.hpp"

using namespace multispin;
using testing_support::half_product_system;

TEST_CASE("validate accepts the half product factor") {
  const auto report = validate_system(half_product_system());
  CHECK(report.lipschitz_ok);
  CHECK(report.admissible());
  CHECK(report.r == 2);
  CHECK(report.c == 1);
  CHECK(report.n == 2);
  CHECK(report.m == 1);
}

TEST_CASE("validate flags a factor scaled by three") {
  auto s = half_product_system();
  for (auto& v : s.factors[0].table) v *= 3.0;
  const auto report = validate_system(s);
  CHECK_FALSE(report.lipschitz_ok);
  CHECK_FALSE(report.admissible());
  CHECK(report.worst_violation == doctest::Approx(3.0));
  CHECK_FALSE(report.violations.empty());
  CHECK_THROWS_AS(require_admissible(s), ValidationError);
}

TEST_CASE("empty factor list is valid") {
  SpinSystem s;
  s.spaces = {Space::uniform(3)};
  const auto report = validate_system(s);
  CHECK(report.admissible());
  CHECK(report.m == 0);
  CHECK(report.r == 2);
  CHECK(report.c == 1);
}

TEST_CASE("structural errors are fatal") {
  auto s = half_product_system();
  s.factors[0].table.pop_back();
  CHECK_FALSE(validate_system(s).structure_ok);
  auto t = half_product_system();
  t.factors[0].scope = {0, 5};
  CHECK_FALSE(validate_system(t).structure_ok);
  auto u = half_product_system();
  u.spaces[0].probs = {0.7, 0.7};
  CHECK_FALSE(validate_system(u).structure_ok);
}

TEST_CASE("shift of a constant factor") {
  SpinSystem s;
  s.spaces = {Space::uniform(2)};
  s.factors.push_back({{0}, {cd{5, 0}, cd{5, 0}}});
  const auto shifted = shift_factors(s, default_anchor(s));
  CHECK(shifted.shift.gamma == cd{5, 0});
  for (auto v : shifted.system.factors[0].table) CHECK(v == cd{0, 0});
}

TEST_CASE("shift at the (-1, -1) anchor") {
  const auto s = half_product_system();
  const std::vector<std::size_t> anchor{0, 0};
  const auto shifted = shift_factors(s, anchor);
  CHECK(shifted.shift.gamma == cd{0.5, 0});
  for (std::size_t t = 0; t < 4; ++t)
    CHECK(shifted.system.factors[0].table[t] == s.factors[0].table[t] - cd{0.5, 0});
  CHECK_THROWS_AS(shift_factors(s, std::vector<std::size_t>{0, 2}), DomainError);
  CHECK_THROWS_AS(shift_factors(s, std::vector<std::size_t>{0}), DomainError);
}

TEST_CASE("shift with no factors") {
  SpinSystem s;
  s.spaces = {Space::uniform(2)};
  const auto shifted = shift_factors(s, default_anchor(s));
  CHECK(shifted.shift.gamma == cd{0, 0});
  CHECK(shifted.system.factors.empty());
}

TEST_CASE("zero-free radius formula") {
  CHECK(zero_free_radius(2, 3, 0.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(zero_free_radius(5, 2, 0.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(zero_free_radius(2, 1, 0.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(zero_free_radius(1, 1, 0.0), DomainError);
  CHECK_THROWS_AS(zero_free_radius(2, 0, 0.0), DomainError);
  CHECK_THROWS_AS(zero_free_radius(2, 1, 1.0), DomainError);
}

TEST_CASE("zero-free radius decreases in r and c and halves when c doubles") {
  for (std::size_t r = 2; r < 12; ++r)
    for (std::size_t c = 1; c < 12; ++c) {
      CHECK(zero_free_radius(r + 1, c) < zero_free_radius(r, c));
      CHECK(zero_free_radius(r, c + 1) < zero_free_radius(r, c));
      CHECK(zero_free_radius(r, 2 * c) == zero_free_radius(r, c) / 2.0);
    }
}

TEST_CASE("magnitude bounds examples") {
  MagnitudeInputs in{3, 2, 2, 1, 1.0};
  const auto b = magnitude_bounds(in, 0.1);
  CHECK(b.log_upper == doctest::Approx(0.2));
  CHECK(b.log_lower == doctest::Approx(-0.2 + 3.0 * std::log(std::sqrt(2.0) / 2.0)));
  CHECK(std::exp(b.log_lower) == doctest::Approx(0.28947).epsilon(1e-4));

  MagnitudeInputs empty{3, 0, 2, 1, 0.0};
  const auto e = magnitude_bounds(empty, 0.2);
  CHECK(e.log_upper == 0.0);
  CHECK(e.log_lower == 0.0);

  const auto z = magnitude_bounds(in, 0.0);
  CHECK(z.log_upper == 0.0);
  CHECK(z.log_lower == doctest::Approx(3.0 * std::log(std::cos(std::numbers::pi / 4.0))));

  CHECK_THROWS_AS(magnitude_bounds(in, 0.34), InadmissibleError);
}

TEST_CASE("lower bound holds on the critical circle for random systems") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = testing_support::random_system(rng, {});
    const auto shifted = shift_factors(s, default_anchor(s));
    const double radius = zero_free_radius(s.arity(), s.multiplicity());
    const auto b = magnitude_bounds(shifted.system, radius);
    for (int k = 0; k < 8; ++k) {
      const cd lambda = std::polar(radius, 2.0 * std::numbers::pi * k / 8.0);
      const double log_abs = std::log(std::abs(testing_support::brute_partition(shifted.system, lambda)));
      CHECK(log_abs >= b.log_lower - 1e-9);
      CHECK(log_abs <= b.log_upper + 1e-9);
    }
  }
}

TEST_CASE("shift preserves the verdict and unshifting restores the value") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = testing_support::random_system(rng, {});
    std::vector<std::size_t> anchor;
    for (const auto& sp : s.spaces) anchor.push_back(rng() % sp.size);
    const auto shifted = shift_factors(s, anchor);
    CHECK(validate_system(shifted.system).admissible() == validate_system(s).admissible());
    CHECK(shifted.system.sup_norm() <= static_cast<double>(s.arity()) + 1e-9);
    const cd lambda{0.07, -0.03};
    const cd restored = std::exp(lambda * shifted.shift.gamma) * exact_partition(shifted.system, lambda);
    CHECK(testing_support::relative_gap(restored, exact_partition(s, lambda)) < 1e-12);
  }
}
