#pragma once

// One-dimensional quadrature rules for the standard Gaussian measure
// (density e^{-x^2/2} / sqrt(2 pi)); weights sum to 1.

#include <cstddef>
#include <span>
#include <vector>

namespace multispin {

struct QuadratureRule {
  std::size_t nodes_per_axis = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> breakpoints;  // interior split points, sorted
};

/// Gauss-Hermite rule in the probabilists' normalization, exact for
/// polynomials of degree <= 2d - 1.
QuadratureRule gauss_hermite_rule(std::size_t d);

/// Gauss rule per piece of the real line split at `breakpoints`, each piece
/// carrying the Gaussian density restricted to it. The d nodes are shared
/// evenly between the pieces (rounded up). Integrands that are smooth on every
/// piece converge spectrally even when they have kinks at the breakpoints.
QuadratureRule piecewise_gaussian_rule(std::size_t d, std::span<const double> breakpoints);

/// Gauss rule for the Gaussian density restricted to [lo, hi] (either end may
/// be infinite). Weights sum to the Gaussian mass of the interval.
QuadratureRule restricted_gaussian_rule(std::size_t d, double lo, double hi);

/// Standard normal probability of [lo, hi].
double gaussian_mass(double lo, double hi);

}  // namespace multispin
