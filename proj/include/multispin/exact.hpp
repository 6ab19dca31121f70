#pragma once

// Brute-force evaluation of F(z) = E e^{z f} and a zero scanner for entire
// functions of one complex variable (grid minima + damped Newton, with
// argument-principle counts on concentric circles).

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "multispin/spin_system.hpp"

namespace multispin {

struct ExactOptions {
  double max_configurations = 16777216.0;  // 2^24
};

/// sum_x (prod_j p_j(x_j)) e^{lambda f(x)} in row-major configuration order.
cd exact_partition(const SpinSystem& system, cd lambda, const ExactOptions& options = {});

/// F and its derivative at one point.
struct ValueAndDerivative {
  cd value;
  cd derivative;
};

using AnalyticFunction = std::function<ValueAndDerivative(cd)>;

/// Tabulated configuration weights and energies of a system, for repeated
/// evaluation of z -> E e^{z f} and its derivative E f e^{z f}.
class PartitionFunction {
 public:
  explicit PartitionFunction(const SpinSystem& system, const ExactOptions& options = {});

  cd value(cd z) const;
  ValueAndDerivative evaluate(cd z) const;
  AnalyticFunction as_function() const;

 private:
  std::vector<double> log_weight_;
  std::vector<cd> energy_;
};

struct WindingOptions {
  /// Relative modulus below which a sample counts as hitting a zero.
  double zero_tolerance = 1e-13;
  /// Largest accepted argument increment between consecutive samples.
  double max_arg_step = 1.5707963267948966;
  /// Samples are doubled up to this count to resolve the argument.
  std::size_t max_samples = 16384;
};

/// Integer count of zeros inside the circle via summed argument increments.
int winding_number(const AnalyticFunction& fn, cd center, double radius, std::size_t samples,
                   const WindingOptions& options = {});
int winding_number(const SpinSystem& system, cd center, double radius, std::size_t samples,
                   const WindingOptions& options = {});

struct LocatedZero {
  cd z;
  double residual = 0.0;  // |F(z)|
};

struct WindingEvidence {
  double circle_radius = 0.0;
  int winding = 0;
  std::size_t roots_inside = 0;
};

struct ZeroScanReport {
  std::vector<LocatedZero> zeros;
  double disc_radius = 0.0;
  cd center{0.0, 0.0};
  double grid_max = 0.0;
  double grid_min = 0.0;
  std::vector<WindingEvidence> winding_evidence;
  std::optional<cd> min_modulus_zero;
  std::size_t newton_seeds = 0;
  std::size_t newton_failures = 0;
  bool consistent = true;  // roots counted inside every circle equal its winding
};

struct ScanOptions {
  double residual_tolerance = 1e-8;  // relative to the grid maximum of |F|
  double dedup_radius = 1e-6;
  std::size_t newton_max_iterations = 80;
  std::size_t winding_samples = 128;
  cd center{0.0, 0.0};
};

ZeroScanReport scan_zeros(const AnalyticFunction& fn, double disc_radius, std::size_t grid,
                          const ScanOptions& options = {});
ZeroScanReport scan_zeros(const SpinSystem& system, double disc_radius, std::size_t grid,
                          const ScanOptions& options = {});

/// Damped Newton iteration from `seed`; returns the final point and whether
/// |F| dropped below `tolerance`. Iteration stops once the iterate leaves the
/// disc of `region_radius` around `region_center`.
std::pair<LocatedZero, bool> polish_zero(
    const AnalyticFunction& fn, cd seed, double tolerance, std::size_t max_iterations,
    cd region_center = {0.0, 0.0},
    double region_radius = std::numeric_limits<double>::infinity());

}  // namespace multispin
