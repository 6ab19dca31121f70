#include "multispin/interpolate.hpp"

#include <chrono>
#include <cmath>

#include "multispin/errors.hpp"

namespace multispin {

namespace {

void check_open_unit(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0))
    throw DomainError(std::string(name) + " must lie in (0, 1)");
}

double log_interpolation_bound(std::size_t N, double beta, std::size_t k) {
  return std::log(static_cast<double>(N)) - std::log(static_cast<double>(k + 1)) -
         std::log(beta - 1.0) - static_cast<double>(k) * std::log(beta);
}

}  // namespace

double interpolation_error_bound(std::size_t N, double beta, std::size_t k) {
  if (N == 0) return 0.0;
  return std::exp(log_interpolation_bound(N, beta, k));
}

std::size_t interpolation_degree(std::size_t N, double beta, double target) {
  if (!(beta > 1.0)) throw DomainError("beta must exceed 1");
  if (!(target > 0.0)) throw DomainError("target error must be positive");
  if (N == 0) return 0;
  const double log_target = std::log(target);
  for (std::size_t k = 1; k < 10'000'000; ++k)
    if (log_interpolation_bound(N, beta, k) <= log_target) return k;
  throw BudgetError("interpolation degree does not fit in the search range");
}

ApproxPlan make_plan(const PlanInputs& in, const PlanLimits& limits) {
  check_open_unit(in.epsilon, "epsilon");
  check_open_unit(in.delta, "delta");
  const double modulus = std::abs(in.lambda);
  if (!within_radius(modulus, in.radius))
    throw InadmissibleError("|lambda| exceeds the admissible radius for delta = " +
                            std::to_string(in.delta));

  ApproxPlan plan;
  plan.lambda = in.lambda;
  plan.epsilon = in.epsilon;
  plan.delta = in.delta;
  plan.radius = in.radius;
  plan.beta = 1.0 / (1.0 - in.delta);
  plan.log_lower_beta = in.log_lower(modulus * plan.beta);

  const double drift = modulus * plan.beta * in.total_bound;
  plan.rho = std::max(drift, 0.5 * (std::log(4.0 / in.epsilon) - plan.log_lower_beta));
  plan.N = static_cast<std::size_t>(std::ceil(5.0 * plan.rho));
  if (plan.N > limits.max_truncation_degree)
    throw BudgetError("truncation degree " + std::to_string(plan.N) + " exceeds the ceiling " +
                      std::to_string(limits.max_truncation_degree));
  plan.truncation_bound = std::exp(-2.0 * plan.rho);

  // p_N is identically 1 when lambda = 0 or f vanishes after the shift.
  const bool trivial = modulus == 0.0 || in.total_bound == 0.0;
  if (trivial) return plan;

  plan.k = interpolation_degree(plan.N, plan.beta, in.epsilon / 3.0);
  plan.moment_order = std::min(plan.k, plan.N);
  plan.interpolation_bound = interpolation_error_bound(plan.N, plan.beta, plan.k);
  const double relative_truncation = std::exp(-2.0 * plan.rho - plan.log_lower_beta);
  plan.epsilon_guarantee = plan.interpolation_bound - std::log1p(-relative_truncation);
  return plan;
}

ApproxPlan choose_plan(const SpinSystem& shifted, cd lambda, double epsilon, double delta,
                       const PlanLimits& limits) {
  check_open_unit(delta, "delta");
  PlanInputs in;
  in.lambda = lambda;
  in.epsilon = epsilon;
  in.delta = delta;
  in.radius = zero_free_radius(shifted.arity(), shifted.multiplicity(), delta);
  in.total_bound = static_cast<double>(shifted.num_factors()) * shifted.sup_norm();
  in.log_lower = [&shifted](double modulus) {
    return magnitude_bounds(shifted, modulus).log_lower;
  };
  return make_plan(in, limits);
}

ComplexSeries taylor_polynomial(std::span<const cd> moments, cd lambda, std::size_t N) {
  if (moments.size() < N + 1) throw DomainError("moment sequence shorter than N + 1");
  ComplexSeries out;
  out.coeffs.resize(N + 1);
  cd scale{1.0, 0.0};
  for (std::size_t s = 0; s <= N; ++s) {
    if (s > 0) scale *= lambda / static_cast<double>(s);
    out.coeffs[s] = scale * moments[s];
  }
  out.coeffs[0] = moments[0];
  return out;
}

ComplexSeries log_taylor(const ComplexSeries& series, std::size_t k) {
  if (series.coeffs.empty() || series.coeffs[0] == cd{0.0, 0.0})
    throw DomainError("log series requires a non-zero constant term");
  const auto& a = series.coeffs;
  auto coeff = [&](std::size_t s) { return s < a.size() ? a[s] : cd{0.0, 0.0}; };
  ComplexSeries out;
  out.coeffs.resize(k + 1);
  auto& b = out.coeffs;
  b[0] = std::log(a[0]);
  for (std::size_t s = 1; s <= k; ++s) {
    cd acc = static_cast<double>(s) * coeff(s);
    for (std::size_t j = 1; j < s; ++j) acc -= static_cast<double>(j) * b[j] * coeff(s - j);
    b[s] = acc / (static_cast<double>(s) * a[0]);
  }
  return out;
}

cd evaluate_interpolant(const ComplexSeries& series, cd z) {
  cd acc{0.0, 0.0};
  for (std::size_t s = series.coeffs.size(); s-- > 0;) acc = acc * z + series.coeffs[s];
  return acc;
}

cd interpolated_log_value(const ApproxPlan& plan, std::span<const cd> moments) {
  if (plan.k == 0) return {0.0, 0.0};
  const auto poly = taylor_polynomial(moments, plan.lambda, plan.moment_order);
  const auto logs = log_taylor(poly, plan.k);
  return evaluate_interpolant(logs, {1.0, 0.0});
}

ApproxReport approximate_partition(const SpinSystem& system, cd lambda, double epsilon,
                                   double delta, const ApproxOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  require_admissible(system);
  const auto anchor = options.anchor ? *options.anchor : default_anchor(system);
  const auto shifted = shift_factors(system, anchor);

  ApproxReport report;
  report.shift = shifted.shift;
  report.plan = choose_plan(shifted.system, lambda, epsilon, delta, options.limits);

  const auto moments_start = clock::now();
  std::vector<cd> moments{cd{1.0, 0.0}};
  if (report.plan.k > 0) {
    auto seq = moment_sequence({shifted.system, report.plan.moment_order, options.moments});
    report.moment_method = seq.method;
    moments = std::move(seq.values);
  }
  const auto moments_end = clock::now();

  report.log_value = interpolated_log_value(report.plan, moments) + lambda * report.shift.gamma;
  report.value = std::exp(report.log_value);
  report.epsilon_guarantee = report.plan.epsilon_guarantee;
  report.timings.moments_ms =
      std::chrono::duration<double, std::milli>(moments_end - moments_start).count();
  report.timings.total_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return report;
}

}  // namespace multispin
