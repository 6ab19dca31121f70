#pragma once

// Interpolation approximation of E e^{lambda f}. The map z -> E e^{lambda z f}
// is replaced by its degree-N Taylor polynomial p_N, which stays zero-free on
// |z| < beta = 1/(1 - delta); the logarithm of p_N is then approximated at
// z = 1 by its degree-k Taylor polynomial.

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "multispin/moments.hpp"
#include "multispin/spin_system.hpp"

namespace multispin {

struct ComplexSeries {
  std::vector<cd> coeffs;

  std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

struct ApproxPlan {
  cd lambda{0.0, 0.0};
  double epsilon = 0.0;
  double delta = 0.0;
  double beta = 1.0;
  double radius = 0.0;          // admissible radius for lambda, includes (1 - delta)
  double rho = 0.0;
  std::size_t N = 0;             // truncation degree of the exponential series
  std::size_t k = 0;             // degree of the log-Taylor polynomial
  std::size_t moment_order = 0;  // highest moment actually needed: min(k, N)
  double log_lower_beta = 0.0;   // ln of the lower bound of |F| on |z| <= beta
  double interpolation_bound = 0.0;  // N / ((k+1)(beta-1) beta^k)
  double truncation_bound = 0.0;     // e^{-2 rho}
  double epsilon_guarantee = 0.0;    // certified bound on the log error
};

struct PlanLimits {
  std::size_t max_truncation_degree = 10000;
};

/// Quantities entering the plan, independent of the model family.
struct PlanInputs {
  cd lambda{0.0, 0.0};
  double epsilon = 0.0;
  double delta = 0.0;
  double radius = 0.0;       // (1 - delta) scaled admissible radius
  double total_bound = 0.0;  // sup |f| after shifting, m * L
  /// Lower bound on ln|F| for parameters of modulus at most the argument.
  std::function<double(double)> log_lower;
};

ApproxPlan make_plan(const PlanInputs& inputs, const PlanLimits& limits = {});

/// Plan for a shifted spin system.
ApproxPlan choose_plan(const SpinSystem& shifted, cd lambda, double epsilon, double delta,
                       const PlanLimits& limits = {});

/// Smallest k with N / ((k+1)(beta-1) beta^k) <= target.
std::size_t interpolation_degree(std::size_t N, double beta, double target);
double interpolation_error_bound(std::size_t N, double beta, std::size_t k);

/// coeffs[s] = lambda^s moments[s] / s!, s = 0..N.
ComplexSeries taylor_polynomial(std::span<const cd> moments, cd lambda, std::size_t N);

/// Taylor coefficients b_0..b_k of ln p at 0 from those of p.
ComplexSeries log_taylor(const ComplexSeries& series, std::size_t k);

/// Horner evaluation of sum b_s z^s.
cd evaluate_interpolant(const ComplexSeries& series, cd z);

struct ApproxTimings {
  double moments_ms = 0.0;
  double total_ms = 0.0;
};

struct ApproxReport {
  cd value{1.0, 0.0};
  cd log_value{0.0, 0.0};
  double epsilon_guarantee = 0.0;
  ApproxPlan plan;
  ShiftRecord shift;
  MomentMethod moment_method = MomentMethod::multiset;
  ApproxTimings timings;
};

struct ApproxOptions {
  std::optional<std::vector<std::size_t>> anchor;
  MomentOptions moments;
  PlanLimits limits;
};

ApproxReport approximate_partition(const SpinSystem& system, cd lambda, double epsilon,
                                   double delta, const ApproxOptions& options = {});

/// Shared tail of the pipeline: moments -> p_N -> log series -> value.
/// `moments` must hold E f^s for s = 0..plan.moment_order.
cd interpolated_log_value(const ApproxPlan& plan, std::span<const cd> moments);

}  // namespace multispin
