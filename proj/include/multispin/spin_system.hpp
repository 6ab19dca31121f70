#pragma once

// Finite multi-spin systems: product probability spaces carrying a sum of
// low-arity complex factors, plus the closed-form zero-free radius and the
// magnitude bounds that hold inside it.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace multispin {

using cd = std::complex<double>;

/// Absolute slack allowed on the Hamming-Lipschitz condition.
inline constexpr double kLipschitzTolerance = 1e-9;
/// Allowed deviation of a probability vector's total from 1.
inline constexpr double kProbabilityTolerance = 1e-12;

struct Space {
  std::size_t size = 0;
  std::vector<double> probs;

  static Space uniform(std::size_t size);
};

/// A factor depending on the coordinates in `scope`. `table` is row-major over
/// the product of the scoped spaces, last scope coordinate fastest.
struct Factor {
  std::vector<std::size_t> scope;
  std::vector<cd> table;
};

struct SpinSystem {
  std::vector<Space> spaces;
  std::vector<Factor> factors;

  std::size_t num_coordinates() const { return spaces.size(); }
  std::size_t num_factors() const { return factors.size(); }
  /// Largest scope size, floored at 2.
  std::size_t arity() const;
  /// Largest number of factors sharing a coordinate, floored at 1.
  std::size_t multiplicity() const;
  /// Largest space size.
  std::size_t max_states() const;
  /// Total number of configurations as a double (may exceed 2^64).
  double configuration_count() const;

  /// Value of factor `i` at a full configuration.
  cd factor_value(std::size_t i, std::span<const std::size_t> config) const;
  /// f(x) = sum of all factors.
  cd total(std::span<const std::size_t> config) const;
  /// max over factors and table entries of |phi_i|.
  double sup_norm() const;
};

/// Row-major strides of a factor table over its scope.
std::vector<std::size_t> table_strides(const SpinSystem& system, const Factor& factor);

struct LipschitzViolation {
  std::size_t factor = 0;
  std::size_t coordinate = 0;
  double magnitude = 0.0;
};

struct ValidationReport {
  std::size_t n = 0, m = 0, q = 0, r = 2, c = 1;
  bool structure_ok = true;
  bool lipschitz_ok = true;
  double worst_violation = 0.0;
  std::vector<std::string> structural_errors;
  std::vector<LipschitzViolation> violations;

  bool admissible() const { return structure_ok && lipschitz_ok; }
};

ValidationReport validate_system(const SpinSystem& system);

/// Throws ValidationError unless the system is structurally sound and every
/// factor is 1-Lipschitz in the Hamming metric.
void require_admissible(const SpinSystem& system);

struct ShiftRecord {
  std::vector<std::size_t> anchor;
  cd gamma{0.0, 0.0};
};

struct ShiftedSystem {
  SpinSystem system;
  ShiftRecord shift;
};

std::vector<std::size_t> default_anchor(const SpinSystem& system);

/// Subtracts phi_i(anchor) from every factor, so that f(anchor) = 0 and
/// E e^{lambda f_shifted} = e^{-lambda gamma} E e^{lambda f}.
ShiftedSystem shift_factors(const SpinSystem& system, std::span<const std::size_t> anchor);

/// (1 - delta) / (3 c sqrt(r - 1)).
double zero_free_radius(std::size_t r, std::size_t c, double delta = 0.0);

/// Whether |lambda| <= radius up to rounding in the last few ulps.
bool within_radius(double modulus, double radius);

struct MagnitudeBounds {
  double log_upper = 0.0;
  double log_lower = 0.0;
  double sup_bound = 0.0;  // L used in the bound
};

struct MagnitudeInputs {
  std::size_t n = 0, m = 0, r = 2, c = 1;
  double sup_bound = 0.0;
};

/// log_lower <= ln|E e^{lambda f}| <= log_upper for every |lambda| <= modulus
/// inside the zero-free disc. For m = 0 the value is exactly 1 and both are 0.
MagnitudeBounds magnitude_bounds(const MagnitudeInputs& inputs, double lambda_modulus);
MagnitudeBounds magnitude_bounds(const SpinSystem& shifted, double lambda_modulus);

}  // namespace multispin
