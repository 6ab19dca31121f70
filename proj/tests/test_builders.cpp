#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

#include "multispin/builders.hpp"
#include "multispin/errors.hpp"
#include "multispin/exact.hpp"
#include "test_support.hpp"

using namespace multispin;

namespace {

// Weighted count of perfect matchings by backtracking over the lowest
// uncovered vertex.
double matching_mass(const Hypergraph& g, const std::vector<double>& p) {
  double no_edge = 1.0;
  for (double q : p) no_edge *= 1.0 - q;
  std::vector<bool> covered(g.num_vertices, false);
  std::function<double(std::size_t)> walk = [&](std::size_t) -> double {
    std::size_t v = 0;
    while (v < g.num_vertices && covered[v]) ++v;
    if (v == g.num_vertices) return 1.0;
    double total = 0.0;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& edge = g.edges[e];
      if (std::find(edge.begin(), edge.end(), v) == edge.end()) continue;
      if (std::any_of(edge.begin(), edge.end(), [&](std::size_t u) { return covered[u]; })) continue;
      for (auto u : edge) covered[u] = true;
      total += p[e] / (1.0 - p[e]) * walk(0);
      for (auto u : edge) covered[u] = false;
    }
    return total;
  };
  return no_edge * walk(0);
}

const OptimalityConfig& solved_config() {
  static const OptimalityConfig config = calibrate_truncation(solve_psi_equation());
  return config;
}

}  // namespace

TEST_CASE("Ising builder") {
  const auto edge = build_ising({2, {{0, 1, 1.0}}, {}});
  CHECK(validate_system(edge).admissible());
  CHECK(std::abs(exact_partition(edge, cd{0.3, 0.2}) - std::cosh(cd{0.15, 0.1})) < 1e-15);
  const auto empty = build_ising({3, {}, {}});
  CHECK(empty.num_factors() == 0);
  const auto path = build_ising({3, {{0, 1, 1.0}, {1, 2, 1.0}}, {}});
  CHECK(path.multiplicity() == 2);
  CHECK(path.arity() == 2);
  const auto field = build_ising({3, {{0, 1, 0.5}, {1, 2, -1.0}}, {0.0, 1.0, -0.3}});
  CHECK(validate_system(field).admissible());
  CHECK(field.multiplicity() == 3);
  CHECK_THROWS_AS(build_ising({2, {{0, 1, 1.5}}, {}}), ValidationError);
  CHECK_THROWS_AS(build_ising({2, {{0, 1, 0.5}}, {2.0, 0.0}}), ValidationError);
}

TEST_CASE("matching tilt examples") {
  const auto single = build_matching_tilt({2, {{0, 1}}}, 1.0, {0.5});
  CHECK_FALSE(single.admissible);
  CHECK(validate_system(single.system).admissible());
  CHECK(std::abs(exact_partition(single.system, cd{single.lambda, 0}) - 0.5676676416183064) < 1e-12);
  CHECK(std::abs(exact_partition(single.system, cd{1.0, 0}) - (1 + std::exp(-2.0)) / 2) < 1e-15);

  const Hypergraph cycle{4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
  for (double mu : {5.0, 10.0}) {
    const auto t = build_matching_tilt(cycle, mu, {});
    const double scaled = 16.0 * exact_partition(t.system, cd{mu, 0}).real();
    CHECK(std::abs(scaled - 2.0) < 4.0 * 16.0 * std::exp(-mu));
  }
  const Hypergraph triangle{3, {{0, 1}, {1, 2}, {2, 0}}};
  const auto t = build_matching_tilt(triangle, 10.0, {});
  CHECK(8.0 * exact_partition(t.system, cd{10.0, 0}).real() < 1e-3);
  CHECK_THROWS_AS(build_matching_tilt({2, {{0, 0}}}, 1.0, {}), ValidationError);
  CHECK_THROWS_AS(build_matching_tilt({2, {{0, 1}}}, 1.0, {1.0}), ValidationError);
  const auto ind = build_matching_tilt(cycle, 1.0, {}, MatchingPenalty::indicator);
  CHECK(validate_system(ind.system).admissible());
}

TEST_CASE("tilted sum at mu = 12 is dominated by perfect matchings") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int trial = 0; trial < 40; ++trial) {
    Hypergraph g;
    g.num_vertices = 2 + rng() % 5;
    const std::size_t m = 1 + rng() % 10;
    for (std::size_t e = 0; e < m; ++e) {
      std::vector<std::size_t> vs(g.num_vertices);
      std::iota(vs.begin(), vs.end(), 0);
      std::shuffle(vs.begin(), vs.end(), rng);
      vs.resize(1 + rng() % std::min<std::size_t>(3, g.num_vertices));
      g.edges.push_back(vs);
    }
    std::vector<double> p;
    for (std::size_t e = 0; e < m; ++e) p.push_back(unit(rng));
    const auto t = build_matching_tilt(g, 12.0, p);
    CHECK(validate_system(t.system).admissible());
    const double value = exact_partition(t.system, cd{12.0, 0}).real();
    CHECK(std::abs(value - matching_mass(g, p)) <= std::exp(-12.0));
  }
}

TEST_CASE("particles and abs integrand") {
  const auto two = build_particles(2, 1);
  REQUIRE(two.model.factors.size() == 1);
  CHECK(two.incidence_c == 1);
  CHECK(two.stated_c == 2);
  const std::vector<std::size_t> tuple{0};
  const auto e = gaussian_factor_expectation(two.model, tuple, 64, 1e-3);
  CHECK(std::abs(e.refined - 2.0 / std::sqrt(std::numbers::pi)) < 1e-3);
  const auto three = build_particles(3, 1);
  CHECK(three.model.num_factors() == 3);
  CHECK(three.model.multiplicity() == 2);
  CHECK(build_particles(2, 2).model.arity() == 4);
  CHECK_THROWS_AS(build_particles(1, 1), DomainError);

  const auto abs1 = build_abs_integrand(1);
  CHECK(validate_gaussian_model(abs1).ok);
  for (double x : {-3.0, -1.5, -1.0, -0.2, 0.0, 0.4, 1.0, 2.5}) {
    const double pt[] = {x};
    CHECK(std::abs(abs1.factors[0].evaluate(pt) - std::abs(std::abs(x) - 1.0)) < 1e-15);
  }
  CHECK(build_abs_integrand(3).multiplicity() == 1);
}

TEST_CASE("clone identity") {
  const auto base = testing_support::half_product_system();
  const auto once = clone_factor_system(base, 1);
  CHECK(once.factors.size() == base.factors.size());
  CHECK(once.factors[0].table == base.factors[0].table);
  const auto thrice = clone_factor_system(base, 3);
  CHECK(std::abs(exact_partition(thrice, cd{0.1, 0}) - std::cosh(0.15)) < 1e-15);
  CHECK(thrice.multiplicity() == 3 * base.multiplicity());
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testing_support::random_system(rng, {});
    for (std::size_t k = 1; k <= 4; ++k) {
      const cd lambda{0.05, 0.02};
      const cd a = exact_partition(clone_factor_system(s, k), lambda);
      const cd b = exact_partition(s, static_cast<double>(k) * lambda);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }
  }
}

TEST_CASE("psi equation") {
  CHECK(std::abs(psi_equation_residual(0.0, 0.0) - std::sqrt(2.0 * std::numbers::pi)) < 1e-12);
  const auto& config = solved_config();
  CHECK(config.residual <= 1e-10);
  CHECK(std::abs(config.v) > 0.1);
  CHECK(config.tau == doctest::Approx(std::abs(config.v)));
  CHECK(std::abs(psi_equation_residual(config.u, config.v, 200000)) <= 1e-10);
  REQUIRE(config.gaussian_zero.has_value());
  CHECK(std::abs(*config.gaussian_zero) < config.rho);
  CHECK(std::abs(truncated_gaussian_integral(config, *config.gaussian_zero).value) < 1e-10);
}

TEST_CASE("cube evaluator") {
  const auto& config = solved_config();
  CHECK(std::abs(cube_partition_eval(config, 7, cd{0, 0}) - 1.0) < 1e-14);
  const cd z{0.3, -0.2};
  const cd direct = 0.5 * (std::exp(z * truncated_psi(config, 1.0) / (2.0 * config.tau)) +
                           std::exp(z * truncated_psi(config, -1.0) / (2.0 * config.tau)));
  CHECK(std::abs(cube_partition_eval(config, 1, z) - direct) < 1e-15);
  for (std::size_t n = 1; n <= 12; ++n) {
    const auto s = cube_system(config, n);
    CHECK(validate_system(s).admissible());
    for (const cd w : {cd{0.2, 0.1}, cd{-0.4, 0.3}, cd{0.05, -0.5}})
      CHECK(std::abs(cube_partition_eval(config, n, w) - exact_partition(s, w)) <= 1e-12 * std::abs(exact_partition(s, w)));
    const auto vd = cube_partition_evaluate(config, n, z);
    CHECK(std::abs(vd.derivative - PartitionFunction(s).evaluate(z).derivative) < 1e-12);
  }
  for (std::size_t n : {2, 16, 64, 256, 1024}) {
    const double radius = zero_free_radius(n, 1);
    for (int k = 0; k < 32; ++k)
      CHECK(std::abs(cube_partition_eval(config, n, std::polar(radius, 2.0 * std::numbers::pi * k / 32.0))) > 0.0);
  }
}

TEST_CASE("optimality rows") {
  const auto& config = solved_config();
  const auto rows = optimality_experiment(config, {64, 256});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].found);
  CHECK(rows[1].found);
  CHECK(rows[1].min_zero_modulus < rows[0].min_zero_modulus);
  CHECK(rows[1].min_zero_modulus < rows[1].envelope);
}
