#pragma once

// Constructors for the application models (Ising, tilted hypergraph
// matchings, Gaussian particles, the abs integrand) and the cube family used
// to probe how the zero-free radius scales with the arity.

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "multispin/exact.hpp"
#include "multispin/gaussian.hpp"
#include "multispin/spin_system.hpp"

namespace multispin {

struct Hypergraph {
  std::size_t num_vertices = 0;
  std::vector<std::vector<std::size_t>> edges;
};

void validate_hypergraph(const Hypergraph& graph);

struct WeightedEdge {
  std::size_t u = 0, v = 0;
  double weight = 0.0;
};

struct IsingGraph {
  std::size_t num_vertices = 0;
  std::vector<WeightedEdge> edges;
  std::vector<double> field;  // empty or one entry per vertex
};

/// Spins x in {+1, -1} (state 0 is +1), uniform. Edge factor w x_u x_v / 2,
/// field factor h x_v / 2.
SpinSystem build_ising(const IsingGraph& graph);

enum class MatchingPenalty {
  linear,     // -|k_v - 1|
  indicator,  // -1 when k_v != 1
};

struct MatchingTilt {
  SpinSystem system;
  double lambda = 0.0;
  double radius = 0.0;
  bool admissible = false;
};

/// One binary coordinate per edge (state 1 = selected, probability p_e) and
/// one factor per vertex penalizing the number k_v of selected incident edges.
MatchingTilt build_matching_tilt(const Hypergraph& graph, double mu,
                                 const std::vector<double>& edge_prob,
                                 MatchingPenalty penalty = MatchingPenalty::linear);

struct ParticleSystem {
  GaussianModel model;
  std::size_t incidence_c = 1;  // computed: N - 1 factors per coordinate
  std::size_t stated_c = 0;     // N
};

/// N particles in R^d, coordinate (p, t) at index p d + t; one distance
/// factor per pair.
ParticleSystem build_particles(std::size_t particles, std::size_t dim);

/// n factors ||x_i| - 1|.
GaussianModel build_abs_integrand(std::size_t n);

/// Repeats each factor k times, so that E e^{lambda f_k} = E e^{k lambda f}.
SpinSystem clone_factor_system(const SpinSystem& system, std::size_t k);

struct OptimalityConfig {
  cd u{0.0, 0.0};
  cd v{0.0, 0.0};
  double tau = 0.0;  // max(|u|, |v|)
  double L = 0.0;
  double rho = 1.25;
  double residual = 0.0;
  /// Zero of the L-truncated Gaussian integral with |z| < rho.
  std::optional<cd> gaussian_zero;
};

/// Integral of e^{psi(x) - x^2/2} over [-12, 12] by composite Simpson.
cd psi_equation_residual(cd u, cd v, std::size_t panels = 100000);

struct PsiSolveOptions {
  cd u{0.0, 0.0};
  std::size_t grid_points = 41;
  std::size_t panels = 100000;
  std::size_t max_iterations = 100;
};

/// Solves the integral equation for v with u pinned; throws ConvergenceError
/// when no root is found.
OptimalityConfig solve_psi_equation(double grid_bound = 4.0, double newton_tol = 1e-12,
                                    const PsiSolveOptions& options = {});

/// psi_L at a real point.
cd truncated_psi(const OptimalityConfig& config, double x);

/// (1/sqrt(2 pi)) integral of e^{z psi_L(x)} e^{-x^2/2} and its z-derivative.
ValueAndDerivative truncated_gaussian_integral(const OptimalityConfig& config, cd z,
                                               std::size_t panels = 20000);

/// Raises L (doubling from 1) until the truncated integral has a zero with
/// |z| < rho, expanding rho by 1.5 when the L range is exhausted.
OptimalityConfig calibrate_truncation(OptimalityConfig config, double max_L = 1024.0,
                                      std::size_t max_expansions = 6);

/// E e^{z phi} on {-1, 1}^n with phi = sqrt(n)/(2 tau) psi_L(sum x / sqrt(n)).
cd cube_partition_eval(const OptimalityConfig& config, std::size_t n, cd z);
ValueAndDerivative cube_partition_evaluate(const OptimalityConfig& config, std::size_t n, cd z);

/// The same function as an explicit one-factor system (n <= 12).
SpinSystem cube_system(const OptimalityConfig& config, std::size_t n);

struct OptimalityRow {
  std::size_t n = 0;
  std::optional<cd> min_zero;
  double min_zero_modulus = 0.0;
  double envelope = 0.0;  // 2 tau rho / sqrt(n)
  bool found = false;
  bool consistent = true;
};

std::vector<OptimalityRow> optimality_experiment(const OptimalityConfig& config,
                                                 const std::vector<std::size_t>& ns,
                                                 std::size_t grid = 24);

}  // namespace multispin
