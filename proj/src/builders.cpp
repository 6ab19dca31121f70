#include "multispin/builders.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include "multispin/errors.hpp"
#include "multispin/parallel.hpp"

namespace multispin {

namespace {

double spin_value(std::size_t state) { return state == 0 ? 1.0 : -1.0; }

// Composite Simpson over [a, b] with an even panel count.
template <class F>
cd simpson(F&& f, double a, double b, std::size_t panels) {
  const double h = (b - a) / static_cast<double>(panels);
  cd sum = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return sum * (h / 3.0);
}

constexpr double kPsiCut = 12.0;

std::size_t half_panels(std::size_t panels) {
  std::size_t half = std::max<std::size_t>(panels / 2, 2);
  return half + half % 2;
}

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

void validate_hypergraph(const Hypergraph& graph) {
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    if (edge.empty()) throw ValidationError("edge " + std::to_string(e) + " is empty");
    for (std::size_t p = 0; p < edge.size(); ++p) {
      if (edge[p] >= graph.num_vertices)
        throw ValidationError("edge " + std::to_string(e) + " has vertex out of range");
      for (std::size_t q = 0; q < p; ++q)
        if (edge[q] == edge[p])
          throw ValidationError("edge " + std::to_string(e) + " repeats a vertex");
    }
  }
}

SpinSystem build_ising(const IsingGraph& graph) {
  if (!graph.field.empty() && graph.field.size() != graph.num_vertices)
    throw ValidationError("field must have one entry per vertex");
  SpinSystem system;
  system.spaces.assign(graph.num_vertices, Space::uniform(2));
  for (const auto& e : graph.edges) {
    if (e.u >= graph.num_vertices || e.v >= graph.num_vertices || e.u == e.v)
      throw ValidationError("edge endpoints must be two distinct vertices");
    if (!(std::abs(e.weight) <= 1.0))
      throw ValidationError("edge weight " + std::to_string(e.weight) + " exceeds 1 in modulus");
    Factor f{{e.u, e.v}, {}};
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b)
        f.table.emplace_back(e.weight * spin_value(a) * spin_value(b) / 2.0, 0.0);
    system.factors.push_back(std::move(f));
  }
  for (std::size_t v = 0; v < graph.field.size(); ++v) {
    const double h = graph.field[v];
    if (!(std::abs(h) <= 1.0))
      throw ValidationError("field " + std::to_string(h) + " exceeds 1 in modulus");
    if (h == 0.0) continue;
    system.factors.push_back({{v}, {cd{h / 2.0, 0.0}, cd{-h / 2.0, 0.0}}});
  }
  return system;
}

MatchingTilt build_matching_tilt(const Hypergraph& graph, double mu,
                                 const std::vector<double>& edge_prob, MatchingPenalty penalty) {
  validate_hypergraph(graph);
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  if (!edge_prob.empty() && edge_prob.size() != graph.edges.size())
    throw ValidationError("edge_prob must have one entry per edge");
  MatchingTilt out;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const double p = edge_prob.empty() ? 0.5 : edge_prob[e];
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("edge probabilities must lie in (0, 1)");
    out.system.spaces.push_back({2, {1.0 - p, p}});
  }
  std::vector<std::vector<std::size_t>> incident(graph.num_vertices);
  for (std::size_t e = 0; e < graph.edges.size(); ++e)
    for (auto v : graph.edges[e]) incident[v].push_back(e);
  for (std::size_t v = 0; v < graph.num_vertices; ++v) {
    Factor f{incident[v], {}};
    const std::size_t deg = incident[v].size();
    const std::size_t size = std::size_t{1} << deg;
    f.table.reserve(size);
    for (std::size_t index = 0; index < size; ++index) {
      const auto k = static_cast<double>(std::popcount(index));
      const double value = penalty == MatchingPenalty::linear ? -std::abs(k - 1.0)
                                                              : (k == 1.0 ? 0.0 : -1.0);
      f.table.emplace_back(value, 0.0);
    }
    out.system.factors.push_back(std::move(f));
  }
  out.lambda = mu;
  out.radius = zero_free_radius(out.system.arity(), out.system.multiplicity(), 0.0);
  out.admissible = within_radius(mu, out.radius);
  return out;
}

ParticleSystem build_particles(std::size_t particles, std::size_t dim) {
  if (particles < 2) throw DomainError("need at least two particles");
  if (dim < 1) throw DomainError("dimension must be positive");
  ParticleSystem out;
  out.model.n = particles * dim;
  for (std::size_t p = 0; p < particles; ++p)
    for (std::size_t q = p + 1; q < particles; ++q) {
      GaussianFactor f;
      f.kind = GaussianFactorKind::euclidean_distance;
      for (std::size_t t = 0; t < dim; ++t) f.scope.push_back(p * dim + t);
      for (std::size_t t = 0; t < dim; ++t) f.scope.push_back(q * dim + t);
      f.params = {1.0};
      out.model.factors.push_back(std::move(f));
    }
  out.incidence_c = particles - 1;
  out.stated_c = particles;
  return out;
}

GaussianModel build_abs_integrand(std::size_t n) {
  if (n < 1) throw DomainError("n must be positive");
  GaussianModel model;
  model.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    GaussianFactor f;
    f.kind = GaussianFactorKind::piecewise_linear_of_sum;
    f.scope = {i};
    f.params = {-2.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0};
    model.factors.push_back(std::move(f));
  }
  return model;
}

SpinSystem clone_factor_system(const SpinSystem& system, std::size_t k) {
  if (k < 1) throw DomainError("clone count must be at least 1");
  SpinSystem out;
  out.spaces = system.spaces;
  for (const auto& f : system.factors)
    for (std::size_t copy = 0; copy < k; ++copy) out.factors.push_back(f);
  return out;
}

cd psi_equation_residual(cd u, cd v, std::size_t panels) {
  const std::size_t half = half_panels(panels);
  const cd left = simpson([&](double x) { return std::exp(u * x - 0.5 * x * x); }, -kPsiCut, 0.0, half);
  const cd right = simpson([&](double x) { return std::exp(v * x - 0.5 * x * x); }, 0.0, kPsiCut, half);
  return left + right;
}

namespace {

cd psi_equation_slope(cd v, std::size_t panels) {
  return simpson([&](double x) { return x * std::exp(v * x - 0.5 * x * x); }, 0.0, kPsiCut,
                 half_panels(panels));
}

}  // namespace

OptimalityConfig solve_psi_equation(double grid_bound, double newton_tol,
                                    const PsiSolveOptions& options) {
  if (!(grid_bound > 0.0)) throw DomainError("grid bound must be positive");
  const std::size_t g = std::max<std::size_t>(options.grid_points, 3);
  const std::size_t coarse = std::max<std::size_t>(options.panels / 10, 4000);
  std::vector<std::pair<double, cd>> samples(g * g);
  parallel_for(g * g, [&](std::size_t idx) {
    const double step = 2.0 * grid_bound / static_cast<double>(g - 1);
    const cd v{-grid_bound + step * static_cast<double>(idx / g),
               -grid_bound + step * static_cast<double>(idx % g)};
    samples[idx] = {std::abs(psi_equation_residual(options.u, v, coarse)), v};
  });
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::size_t attempts = std::min<std::size_t>(samples.size(), 12);
  for (std::size_t a = 0; a < attempts; ++a) {
    cd v = samples[a].second;
    cd r = psi_equation_residual(options.u, v, options.panels);
    for (std::size_t it = 0; it < options.max_iterations && std::abs(r) > newton_tol; ++it) {
      const cd step = -r / psi_equation_slope(v, options.panels);
      double t = 1.0;
      bool moved = false;
      while (t >= 1.0 / 1024.0) {
        const cd trial = v + t * step;
        const cd rt = psi_equation_residual(options.u, trial, options.panels);
        if (std::abs(rt) < std::abs(r)) {
          v = trial;
          r = rt;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    if (std::abs(r) <= newton_tol && std::abs(v) > 1e-6) {
      OptimalityConfig config;
      config.u = options.u;
      config.v = v;
      config.tau = std::max(std::abs(options.u), std::abs(v));
      config.residual = std::abs(r);
      return config;
    }
  }
  throw ConvergenceError("no root of the psi equation found; raise the grid bound or move u");
}

cd truncated_psi(const OptimalityConfig& config, double x) {
  const cd value = x >= 0.0 ? config.v * x : config.u * x;
  const double modulus = std::abs(value);
  return config.L > 0.0 && modulus > config.L ? value * (config.L / modulus) : value;
}

ValueAndDerivative truncated_gaussian_integral(const OptimalityConfig& config, cd z,
                                               std::size_t panels) {
  const std::size_t half = half_panels(panels);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto value = [&](double x) { return std::exp(z * truncated_psi(config, x) - 0.5 * x * x); };
  auto slope = [&](double x) {
    const cd p = truncated_psi(config, x);
    return p * std::exp(z * p - 0.5 * x * x);
  };
  return {norm * (simpson(value, -kPsiCut, 0.0, half) + simpson(value, 0.0, kPsiCut, half)),
          norm * (simpson(slope, -kPsiCut, 0.0, half) + simpson(slope, 0.0, kPsiCut, half))};
}

OptimalityConfig calibrate_truncation(OptimalityConfig config, double max_L,
                                      std::size_t max_expansions) {
  if (!(config.tau > 0.0)) throw DomainError("config has no solved psi equation");
  if (!(config.rho > 1.0)) config.rho = 1.25;
  for (std::size_t expansion = 0; expansion <= max_expansions; ++expansion) {
    for (double L = 1.0; L <= max_L; L *= 2.0) {
      config.L = L;
      const AnalyticFunction fn = [&config](cd z) { return truncated_gaussian_integral(config, z); };
      auto [zero, ok] = polish_zero(fn, cd{1.0, 0.0}, 1e-12, 80, cd{0.0, 0.0}, 2.0 * config.rho);
      if (ok && std::abs(zero.z) < config.rho) {
        config.gaussian_zero = zero.z;
        return config;
      }
    }
    config.rho *= 1.5;
  }
  throw ConvergenceError("no zero of the truncated Gaussian integral within the search radius");
}

namespace {

struct CubeTerms {
  std::vector<double> log_weight;
  std::vector<cd> energy;
};

CubeTerms cube_terms(const OptimalityConfig& config, std::size_t n) {
  if (n < 1) throw DomainError("n must be positive");
  if (!(config.tau > 0.0)) throw DomainError("config has no solved psi equation");
  CubeTerms t;
  const double root = std::sqrt(static_cast<double>(n));
  const double scale = root / (2.0 * config.tau);
  for (std::size_t k = 0; k <= n; ++k) {
    t.log_weight.push_back(log_binomial(n, k) - static_cast<double>(n) * std::numbers::ln2);
    const double s = (2.0 * static_cast<double>(k) - static_cast<double>(n)) / root;
    t.energy.push_back(scale * truncated_psi(config, s));
  }
  return t;
}

}  // namespace

ValueAndDerivative cube_partition_evaluate(const OptimalityConfig& config, std::size_t n, cd z) {
  const auto t = cube_terms(config, n);
  std::vector<cd> exponent(t.energy.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < exponent.size(); ++k) {
    exponent[k] = t.log_weight[k] + z * t.energy[k];
    top = std::max(top, exponent[k].real());
  }
  cd value{0.0, 0.0}, derivative{0.0, 0.0};
  for (std::size_t k = 0; k < exponent.size(); ++k) {
    const cd term = std::exp(exponent[k] - top);
    value += term;
    derivative += t.energy[k] * term;
  }
  const double scale = std::exp(top);
  return {value * scale, derivative * scale};
}

cd cube_partition_eval(const OptimalityConfig& config, std::size_t n, cd z) {
  return cube_partition_evaluate(config, n, z).value;
}

SpinSystem cube_system(const OptimalityConfig& config, std::size_t n) {
  if (n < 1 || n > 12) throw DomainError("explicit cube system supports 1 <= n <= 12");
  const auto t = cube_terms(config, n);
  SpinSystem system;
  system.spaces.assign(n, Space::uniform(2));
  Factor f;
  for (std::size_t j = 0; j < n; ++j) f.scope.push_back(j);
  const std::size_t size = std::size_t{1} << n;
  for (std::size_t index = 0; index < size; ++index) {
    // State 0 is +1; k counts the +1 coordinates.
    const std::size_t k = n - static_cast<std::size_t>(std::popcount(index));
    f.table.push_back(t.energy[k]);
  }
  system.factors.push_back(std::move(f));
  return system;
}

std::vector<OptimalityRow> optimality_experiment(const OptimalityConfig& config,
                                                 const std::vector<std::size_t>& ns,
                                                 std::size_t grid) {
  std::vector<OptimalityRow> rows;
  for (auto n : ns) {
    OptimalityRow row;
    row.n = n;
    row.envelope = 2.0 * config.tau * config.rho / std::sqrt(static_cast<double>(n));
    const AnalyticFunction fn = [&config, n](cd z) { return cube_partition_evaluate(config, n, z); };
    const double radius = 1.5 * row.envelope;
    const auto scan = scan_zeros(fn, radius, grid);
    row.consistent = scan.consistent;
    if (scan.min_modulus_zero) {
      row.min_zero = scan.min_modulus_zero;
    } else if (config.gaussian_zero) {
      const cd seed = *config.gaussian_zero * (2.0 * config.tau / std::sqrt(static_cast<double>(n)));
      auto [zero, ok] = polish_zero(fn, seed, 1e-12, 80,
                                    cd{0.0, 0.0}, radius);
      if (ok && std::abs(zero.z) <= radius) row.min_zero = zero.z;
    }
    if (row.min_zero) {
      row.found = true;
      row.min_zero_modulus = std::abs(*row.min_zero);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace multispin
