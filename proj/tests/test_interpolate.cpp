#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "multispin/errors.hpp"
#include "multispin/exact.hpp"
#include "multispin/interpolate.hpp"
#include "test_support.hpp"

using namespace multispin;
using testing_support::half_product_system;

TEST_CASE("truncation and interpolation bound instances") {
  // rho = 1, N = 5
  double worst = 0.0;
  for (int t = 0; t < 128; ++t) {
    const cd z = std::polar(1.0, 2.0 * std::numbers::pi * t / 128.0);
    const std::vector<cd> ones(6, cd{1, 0});
    const auto series = taylor_polynomial(ones, z, 5);
    cd sum{0, 0};
    for (auto c : series.coeffs) sum += c;
    worst = std::max(worst, std::abs(std::exp(z) - sum));
  }
  CHECK(worst <= std::exp(-2.0));
  CHECK(interpolation_error_bound(10, 2.0, 5) == doctest::Approx(10.0 / (6.0 * 32.0)).epsilon(1e-14));
  CHECK(interpolation_degree(10, 2.0, 0.06) == 5);
}

TEST_CASE("plan for a system without factors is trivial") {
  SpinSystem s;
  s.spaces = {Space::uniform(2)};
  const auto plan = choose_plan(s, cd{0.1, 0.0}, 1e-3, 0.1);
  CHECK(plan.k == 0);
  const auto report = approximate_partition(s, cd{0.1, 0.2}, 1e-3, 0.1);
  CHECK(report.value == cd{1, 0});
}

TEST_CASE("plan invariants") {
  const auto s = half_product_system();
  const auto shifted = shift_factors(s, default_anchor(s)).system;
  for (double eps : {1e-1, 1e-3, 1e-6})
    for (double delta : {0.05, 0.1, 0.5}) {
      const double radius = zero_free_radius(2, 1, delta);
      const auto plan = choose_plan(shifted, cd{0.0, radius}, eps, delta);
      CHECK(plan.beta * radius <= zero_free_radius(2, 1, 0.0) * (1 + 1e-15));
      CHECK(static_cast<double>(plan.N) >= 5.0 * plan.rho);
      CHECK(-2.0 * plan.rho <= std::log(eps / 4.0) + plan.log_lower_beta + 1e-12);
      CHECK(plan.interpolation_bound <= eps / 3.0);
      CHECK(plan.epsilon_guarantee <= eps);
      if (plan.k > 1) CHECK(interpolation_error_bound(plan.N, plan.beta, plan.k - 1) > eps / 3.0);
    }
  CHECK_THROWS_AS(choose_plan(shifted, cd{0.31, 0}, 1e-3, 0.1), InadmissibleError);
  CHECK_THROWS_AS(choose_plan(shifted, cd{0.1, 0}, 0.0, 0.1), DomainError);
  CHECK_THROWS_AS(choose_plan(shifted, cd{0.1, 0}, 1e-3, 1.0), DomainError);
  PlanLimits tight{3};
  CHECK_THROWS_AS(choose_plan(shifted, cd{0.1, 0}, 1e-6, 0.1, tight), BudgetError);
}

TEST_CASE("taylor polynomial examples") {
  const std::vector<cd> m{1, 0, 0.25};
  const auto p = taylor_polynomial(m, cd{0.2, 0}, 2);
  CHECK(p.coeffs[0] == cd{1, 0});
  CHECK(p.coeffs[1] == cd{0, 0});
  CHECK(std::abs(p.coeffs[2] - 0.005) < 1e-17);
  const auto zero = taylor_polynomial(m, cd{0, 0}, 2);
  CHECK(zero.coeffs == std::vector<cd>{1, 0, 0});
  const std::vector<cd> ones{1, 1};
  CHECK(taylor_polynomial(ones, cd{1, 0}, 1).coeffs == std::vector<cd>{1, 1});
}

TEST_CASE("log taylor examples") {
  const auto a = log_taylor({{1, 1}}, 3);
  REQUIRE(a.coeffs.size() == 4);
  CHECK(std::abs(a.coeffs[0]) < 1e-16);
  CHECK(std::abs(a.coeffs[1] - 1.0) < 1e-16);
  CHECK(std::abs(a.coeffs[2] + 0.5) < 1e-16);
  CHECK(std::abs(a.coeffs[3] - 1.0 / 3.0) < 1e-16);
  const auto b = log_taylor({{1, 1, 0.5, 1.0 / 6.0}}, 3);
  CHECK(std::abs(b.coeffs[1] - 1.0) < 1e-16);
  CHECK(std::abs(b.coeffs[2]) < 1e-16);
  CHECK(std::abs(b.coeffs[3]) < 1e-16);
  const auto c = log_taylor({{2}}, 2);
  CHECK(std::abs(c.coeffs[0] - std::log(2.0)) < 1e-16);
  CHECK(c.coeffs[1] == cd{0, 0});
  CHECK(c.coeffs[2] == cd{0, 0});
  CHECK_THROWS_AS(log_taylor({{0, 1}}, 2), DomainError);
}

TEST_CASE("interpolant evaluation") {
  CHECK(evaluate_interpolant({{0, 1, -0.5}}, cd{1, 0}) == cd{0.5, 0});
  CHECK(evaluate_interpolant({{cd{0.3, 0.1}, 1, 7}}, cd{0, 0}) == cd{0.3, 0.1});
  CHECK(std::abs(evaluate_interpolant({{0, 1, -0.5, 1.0 / 3.0}}, cd{0.5, 0}) - (0.5 - 0.125 + 0.125 / 3.0)) < 1e-15);
}

TEST_CASE("exp of the log series reproduces the input") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ComplexSeries a;
    a.coeffs.push_back(cd{1.0, 0.0});
    double scale = 1.0;
    for (int s = 0; s < 12; ++s) {
      scale *= 0.5;
      a.coeffs.emplace_back(scale * g(rng), scale * g(rng));
    }
    const auto b = log_taylor(a, 12);
    // exp series by the recurrence s c_s = sum j b_j c_{s-j}
    std::vector<cd> c(13);
    c[0] = std::exp(b.coeffs[0]);
    for (std::size_t s = 1; s <= 12; ++s) {
      cd acc{0, 0};
      for (std::size_t j = 1; j <= s; ++j) acc += static_cast<double>(j) * b.coeffs[j] * c[s - j];
      c[s] = acc / static_cast<double>(s);
    }
    for (std::size_t s = 0; s <= 12; ++s)
      CHECK(std::abs(c[s] - a.coeffs[s]) <= 1e-12 * std::max(1.0, std::abs(a.coeffs[s])));
  }
}

TEST_CASE("approximation of the half product system") {
  const auto s = half_product_system();
  const auto r = approximate_partition(s, cd{0.2, 0}, 1e-3, 0.1);
  CHECK(std::abs(r.log_value - std::log(std::cosh(0.1))) <= 1e-3);
  CHECK(approximate_partition(s, cd{0, 0}, 1e-3, 0.1).value == cd{1, 0});
  CHECK_THROWS_AS(approximate_partition(s, cd{0.5, 0}, 1e-3, 0.1), InadmissibleError);
  auto bad = s;
  for (auto& v : bad.factors[0].table) v *= 3.0;
  CHECK_THROWS_AS(approximate_partition(bad, cd{0.05, 0}, 1e-3, 0.1), ValidationError);
}

TEST_CASE("guarantee covers the observed error on random systems") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto s = testing_support::random_system(rng, {});
    const double radius = zero_free_radius(s.arity(), s.multiplicity(), 0.1);
    const cd lambda = std::polar(0.9 * radius * unit(rng), 2.0 * std::numbers::pi * unit(rng));
    for (double eps : {1e-2, 1e-4}) {
      const auto r = approximate_partition(s, lambda, eps, 0.1);
      const cd truth = std::log(testing_support::brute_partition(s, lambda));
      cd gap = r.log_value - truth;
      gap.imag(std::remainder(gap.imag(), 2.0 * std::numbers::pi));
      CHECK(std::abs(gap) <= r.epsilon_guarantee + 1e-12);
      CHECK(r.epsilon_guarantee <= eps);
    }
  }
}
