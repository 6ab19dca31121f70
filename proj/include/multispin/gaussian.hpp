#pragma once

// Factors on R^n under the standard Gaussian measure. Factors come from a
// closed catalog whose l1-Lipschitz constants are known analytically; moments
// are computed by tensor-product quadrature.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multispin/interpolate.hpp"
#include "multispin/quadrature.hpp"
#include "multispin/spin_system.hpp"

namespace multispin {

enum class GaussianFactorKind {
  /// |a . x_S + b|; params = a_1..a_s, b.
  abs_linear,
  /// scale * ||x_U - x_V||_2 with scope = U followed by V (equal halves);
  /// params = scale.
  euclidean_distance,
  /// psi(sum_{j in S} x_j) for a continuous piecewise-linear complex psi given
  /// by knots; params = t_1, re_1, im_1, t_2, re_2, im_2, ... with strictly
  /// increasing t and linear continuation beyond the end knots.
  piecewise_linear_of_sum,
};

const char* to_string(GaussianFactorKind kind);
GaussianFactorKind gaussian_kind_from_string(const std::string& name);

struct GaussianFactor {
  GaussianFactorKind kind = GaussianFactorKind::abs_linear;
  std::vector<std::size_t> scope;
  std::vector<double> params;
  /// Subtracted before clamping (shift so that phi(0) = 0).
  cd offset{0.0, 0.0};
  /// Radial clamp |phi| <= clamp applied after the offset.
  std::optional<double> clamp;

  /// Value at the scope coordinates (in scope order).
  cd evaluate(std::span<const double> scope_values) const;
  /// Value of the raw catalog function, ignoring offset and clamp.
  cd raw(std::span<const double> scope_values) const;
  double lipschitz_constant() const;
  /// Kink locations along the axis when the scope is a single coordinate.
  std::vector<double> axis_breakpoints() const;
};

struct GaussianModel {
  std::size_t n = 0;
  std::vector<GaussianFactor> factors;

  std::size_t num_factors() const { return factors.size(); }
  std::size_t arity() const;         // floored at 2
  std::size_t multiplicity() const;  // floored at 1
};

struct GaussianValidation {
  bool ok = true;
  std::vector<std::string> errors;
  double worst_lipschitz = 0.0;
};

GaussianValidation validate_gaussian_model(const GaussianModel& model);
void require_admissible(const GaussianModel& model);

/// phi_L: phi where |phi| <= L, L phi / |phi| elsewhere.
GaussianFactor truncate_factor(const GaussianFactor& factor, double L);

/// (1 - delta) / (6 c sqrt(r - 1)).
double gaussian_zero_free_radius(std::size_t r, std::size_t c, double delta = 0.0);

/// log_upper = |lambda| m L; log_lower = -|lambda| m L - pi^2 n / (32 r).
MagnitudeBounds gaussian_magnitude_bounds(const GaussianModel& model, double L,
                                          double lambda_modulus);

/// Per-axis rules with each axis split at the kinks of the single-coordinate
/// factors touching it (and at 0).
std::vector<QuadratureRule> axis_rules(const GaussianModel& model, std::size_t nodes_per_axis);

struct QuadratureOptions {
  /// Ceiling on tensor-product nodes per expectation.
  double max_nodes = 16777216.0;
};

/// Tensor-product quadrature of E[prod_{i in tuple} phi_i] over the union of
/// the scopes.
cd tensor_expectation(const GaussianModel& model, std::span<const std::size_t> tuple,
                      std::span<const QuadratureRule> rules, const QuadratureOptions& options = {});

struct RefinedExpectation {
  cd value;
  cd refined;       // same expectation with 2d nodes per axis
  double difference = 0.0;
  bool converged = true;
};

RefinedExpectation gaussian_factor_expectation(const GaussianModel& model,
                                               std::span<const std::size_t> tuple,
                                               std::size_t nodes_per_axis,
                                               double tolerance = 1e-8,
                                               const QuadratureOptions& options = {});

struct GaussianOracleResult {
  cd value;
  cd previous;
  std::size_t nodes_per_axis = 0;
  bool converged = false;
};

struct GaussianOracleOptions {
  double relative_tolerance = 1e-9;
  std::size_t max_nodes_per_axis = 512;
  double max_total_nodes = 4194304.0;  // 2^22
};

/// Dense tensor quadrature of E e^{lambda f} (n <= 3), doubling the nodes
/// until successive values agree.
GaussianOracleResult exact_gaussian_partition(const GaussianModel& model, cd lambda,
                                              std::size_t axis_nodes,
                                              const GaussianOracleOptions& options = {});

/// Tensor-quadrature evaluation of z -> E e^{z f} and E f e^{z f} for small n.
class GaussianPartitionFunction {
 public:
  GaussianPartitionFunction(const GaussianModel& model, std::size_t nodes_per_axis,
                            double max_total_nodes = 4194304.0);
  cd value(cd z) const;
  double max_abs_energy() const;

 private:
  std::vector<double> weight_;
  std::vector<cd> energy_;
};

struct GaussianApproxReport {
  ApproxReport report;
  double truncation_L = 0.0;
  bool truncation_auto = true;
  double quadrature_residual = 0.0;  // |log value(d) - log value(2d)|
  cd refined_log_value{0.0, 0.0};
  std::size_t nodes_per_axis = 0;
  MomentMethod moment_method = MomentMethod::enumeration;
};

struct GaussianApproxOptions {
  std::size_t nodes_per_axis = 32;
  /// <= 0 selects 1.05 x max |phi_shifted| over the refined node set.
  double truncation_L = 0.0;
  MomentOptions moments;
  PlanLimits limits;
};

GaussianApproxReport approximate_gaussian_partition(const GaussianModel& model, cd lambda,
                                                    double epsilon, double delta,
                                                    const GaussianApproxOptions& options = {});

/// E f^s, s = 0..max_order, for f = sum of the model's factors (as given,
/// offsets and clamps included).
MomentSequence gaussian_moment_sequence(const GaussianModel& model, std::size_t max_order,
                                        std::span<const QuadratureRule> rules,
                                        const MomentOptions& options = {});

struct GaussianDiscScan {
  double radius = 0.0;
  double min_modulus = 0.0;
  double log_lower = 0.0;
  double truncation_L = 0.0;
  double quadrature_residual = 0.0;
  bool zero_free = false;  // min |F| >= e^{log_lower} - residual
};

/// Evaluates the quadrature partition function on a grid over the closed
/// zero-free disc (n <= 3) and compares min |F| with the lower bound.
GaussianDiscScan scan_gaussian_disc(const GaussianModel& model, std::size_t grid,
                                    std::size_t nodes_per_axis);

}  // namespace multispin
