#include "multispin/gaussian.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

#include "multispin/detail/odometer.hpp"
#include "multispin/errors.hpp"
#include "multispin/moments.hpp"
#include "multispin/parallel.hpp"

namespace multispin {

const char* to_string(GaussianFactorKind kind) {
  switch (kind) {
    case GaussianFactorKind::abs_linear: return "abs_linear";
    case GaussianFactorKind::euclidean_distance: return "euclidean_distance";
    case GaussianFactorKind::piecewise_linear_of_sum: return "piecewise_linear_of_sum";
  }
  return "unknown";
}

GaussianFactorKind gaussian_kind_from_string(const std::string& name) {
  if (name == "abs_linear") return GaussianFactorKind::abs_linear;
  if (name == "euclidean_distance") return GaussianFactorKind::euclidean_distance;
  if (name == "piecewise_linear_of_sum") return GaussianFactorKind::piecewise_linear_of_sum;
  throw ParseError("unknown Gaussian factor kind '" + name + "'");
}

namespace {

struct Knot {
  double t;
  cd value;
};

std::vector<Knot> knots_of(const GaussianFactor& f) {
  std::vector<Knot> knots;
  for (std::size_t i = 0; i + 3 <= f.params.size(); i += 3)
    knots.push_back({f.params[i], cd{f.params[i + 1], f.params[i + 2]}});
  return knots;
}

cd piecewise_value(const std::vector<Knot>& knots, double t) {
  std::size_t seg = 0;
  if (t >= knots.back().t) {
    seg = knots.size() - 2;
  } else if (t > knots.front().t) {
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double x, const Knot& k) { return x < k.t; });
    seg = static_cast<std::size_t>(it - knots.begin()) - 1;
  }
  const Knot& a = knots[seg];
  const Knot& b = knots[seg + 1];
  return a.value + (t - a.t) * (b.value - a.value) / (b.t - a.t);
}

cd clamp_radial(cd v, double L) {
  const double modulus = std::abs(v);
  return modulus > L ? v * (L / modulus) : v;
}

std::size_t count_nodes(std::span<const QuadratureRule> rules, std::span<const std::size_t> axes,
                        double ceiling) {
  double total = 1.0;
  for (auto j : axes) total *= static_cast<double>(rules[j].nodes.size());
  if (total > ceiling)
    throw BudgetError("tensor quadrature with " + std::to_string(total) +
                      " nodes exceeds the ceiling");
  return static_cast<std::size_t>(total);
}

}  // namespace

cd GaussianFactor::raw(std::span<const double> x) const {
  switch (kind) {
    case GaussianFactorKind::abs_linear: {
      double acc = params.back();
      for (std::size_t j = 0; j < scope.size(); ++j) acc += params[j] * x[j];
      return {std::abs(acc), 0.0};
    }
    case GaussianFactorKind::euclidean_distance: {
      const std::size_t half = scope.size() / 2;
      double sq = 0.0;
      for (std::size_t j = 0; j < half; ++j) sq += (x[j] - x[half + j]) * (x[j] - x[half + j]);
      return {params[0] * std::sqrt(sq), 0.0};
    }
    case GaussianFactorKind::piecewise_linear_of_sum: {
      double t = 0.0;
      for (std::size_t j = 0; j < scope.size(); ++j) t += x[j];
      return piecewise_value(knots_of(*this), t);
    }
  }
  return {0.0, 0.0};
}

cd GaussianFactor::evaluate(std::span<const double> x) const {
  const cd v = raw(x) - offset;
  return clamp ? clamp_radial(v, *clamp) : v;
}

double GaussianFactor::lipschitz_constant() const {
  switch (kind) {
    case GaussianFactorKind::abs_linear: {
      // Dual of l1 is l-infinity.
      double worst = 0.0;
      for (std::size_t j = 0; j + 1 < params.size(); ++j) worst = std::max(worst, std::abs(params[j]));
      return worst;
    }
    case GaussianFactorKind::euclidean_distance:
      return params.empty() ? 0.0 : std::abs(params[0]);
    case GaussianFactorKind::piecewise_linear_of_sum: {
      const auto knots = knots_of(*this);
      double worst = 0.0;
      for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        worst = std::max(worst, std::abs(knots[i + 1].value - knots[i].value) /
                                    (knots[i + 1].t - knots[i].t));
      return worst;
    }
  }
  return 0.0;
}

std::vector<double> GaussianFactor::axis_breakpoints() const {
  if (scope.size() != 1) return {};
  switch (kind) {
    case GaussianFactorKind::abs_linear:
      if (params[0] != 0.0) return {-params[1] / params[0]};
      return {};
    case GaussianFactorKind::piecewise_linear_of_sum: {
      std::vector<double> out;
      for (const auto& k : knots_of(*this)) out.push_back(k.t);
      return out;
    }
    default:
      return {};
  }
}

std::size_t GaussianModel::arity() const {
  std::size_t r = 2;
  for (const auto& f : factors) r = std::max(r, f.scope.size());
  return r;
}

std::size_t GaussianModel::multiplicity() const {
  std::vector<std::size_t> count(n, 0);
  for (const auto& f : factors)
    for (auto j : f.scope)
      if (j < n) ++count[j];
  std::size_t c = 1;
  for (auto k : count) c = std::max(c, k);
  return c;
}

GaussianValidation validate_gaussian_model(const GaussianModel& model) {
  GaussianValidation out;
  auto fail = [&](std::size_t i, const std::string& msg) {
    out.ok = false;
    out.errors.push_back("factor " + std::to_string(i) + ": " + msg);
  };
  for (std::size_t i = 0; i < model.factors.size(); ++i) {
    const auto& f = model.factors[i];
    bool scope_ok = true;
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      if (f.scope[p] >= model.n) {
        fail(i, "scope index " + std::to_string(f.scope[p]) + " out of range");
        scope_ok = false;
      }
      for (std::size_t q = 0; q < p; ++q)
        if (f.scope[q] == f.scope[p]) {
          fail(i, "repeated scope index");
          scope_ok = false;
        }
    }
    if (!scope_ok) continue;
    if (std::any_of(f.params.begin(), f.params.end(), [](double v) { return !std::isfinite(v); })) {
      fail(i, "non-finite parameter");
      continue;
    }
    switch (f.kind) {
      case GaussianFactorKind::abs_linear:
        if (f.params.size() != f.scope.size() + 1) {
          fail(i, "abs_linear needs one coefficient per scope coordinate plus an offset");
          continue;
        }
        break;
      case GaussianFactorKind::euclidean_distance:
        if (f.scope.empty() || f.scope.size() % 2 != 0 || f.params.size() != 1) {
          fail(i, "euclidean_distance needs two equal coordinate blocks and one scale");
          continue;
        }
        break;
      case GaussianFactorKind::piecewise_linear_of_sum: {
        if (f.scope.empty() || f.params.size() < 6 || f.params.size() % 3 != 0) {
          fail(i, "piecewise_linear_of_sum needs at least two (t, re, im) knots");
          continue;
        }
        const auto knots = knots_of(f);
        bool increasing = true;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) increasing &= knots[k + 1].t > knots[k].t;
        if (!increasing) {
          fail(i, "knot positions must increase strictly");
          continue;
        }
        break;
      }
    }
    const double lip = f.lipschitz_constant();
    out.worst_lipschitz = std::max(out.worst_lipschitz, lip);
    if (lip > 1.0 + kLipschitzTolerance) fail(i, "l1-Lipschitz constant " + std::to_string(lip) + " exceeds 1");
  }
  return out;
}

void require_admissible(const GaussianModel& model) {
  const auto v = validate_gaussian_model(model);
  if (!v.ok) throw ValidationError(v.errors.front());
}

GaussianFactor truncate_factor(const GaussianFactor& factor, double L) {
  if (!(L > 0.0)) throw DomainError("truncation level must be positive");
  GaussianFactor out = factor;
  out.clamp = factor.clamp ? std::min(*factor.clamp, L) : L;
  return out;
}

double gaussian_zero_free_radius(std::size_t r, std::size_t c, double delta) {
  return zero_free_radius(r, c, delta) / 2.0;
}

MagnitudeBounds gaussian_magnitude_bounds(const GaussianModel& model, double L,
                                          double lambda_modulus) {
  if (!(lambda_modulus >= 0.0)) throw DomainError("lambda modulus must be non-negative");
  const std::size_t r = model.arity();
  if (!within_radius(lambda_modulus, gaussian_zero_free_radius(r, model.multiplicity(), 0.0)))
    throw InadmissibleError("|lambda| exceeds the Gaussian zero-free radius 1/(6c sqrt(r-1))");
  MagnitudeBounds b;
  b.sup_bound = L;
  const double drift = lambda_modulus * static_cast<double>(model.num_factors()) * L;
  b.log_upper = drift;
  b.log_lower = -drift - std::numbers::pi * std::numbers::pi * static_cast<double>(model.n) /
                             (32.0 * static_cast<double>(r));
  return b;
}

std::vector<QuadratureRule> axis_rules(const GaussianModel& model, std::size_t nodes_per_axis) {
  std::vector<std::vector<double>> cuts(model.n, std::vector<double>{0.0});
  for (const auto& f : model.factors)
    for (double b : f.axis_breakpoints()) cuts[f.scope[0]].push_back(b);
  std::map<std::vector<double>, QuadratureRule> cache;
  std::vector<QuadratureRule> rules;
  rules.reserve(model.n);
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    auto it = cache.find(c);
    if (it == cache.end()) it = cache.emplace(c, piecewise_gaussian_rule(nodes_per_axis, c)).first;
    rules.push_back(it->second);
  }
  return rules;
}

cd tensor_expectation(const GaussianModel& model, std::span<const std::size_t> tuple,
                      std::span<const QuadratureRule> rules, const QuadratureOptions& options) {
  std::vector<std::size_t> coords;
  for (auto i : tuple) {
    if (i >= model.num_factors()) throw DomainError("factor index out of range");
    const auto& scope = model.factors[i].scope;
    coords.insert(coords.end(), scope.begin(), scope.end());
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  count_nodes(rules, coords, options.max_nodes);

  std::vector<std::size_t> radices(coords.size());
  for (std::size_t p = 0; p < coords.size(); ++p) radices[p] = rules[coords[p]].nodes.size();
  std::vector<std::vector<std::size_t>> positions(tuple.size());
  for (std::size_t t = 0; t < tuple.size(); ++t)
    for (auto j : model.factors[tuple[t]].scope)
      positions[t].push_back(static_cast<std::size_t>(
          std::lower_bound(coords.begin(), coords.end(), j) - coords.begin()));

  std::vector<std::size_t> digits(coords.size(), 0);
  std::vector<double> point;
  cd sum{0.0, 0.0};
  do {
    double weight = 1.0;
    for (std::size_t p = 0; p < coords.size(); ++p) weight *= rules[coords[p]].weights[digits[p]];
    cd product{1.0, 0.0};
    for (std::size_t t = 0; t < tuple.size(); ++t) {
      point.clear();
      for (auto pos : positions[t]) point.push_back(rules[coords[pos]].nodes[digits[pos]]);
      product *= model.factors[tuple[t]].evaluate(point);
    }
    sum += weight * product;
  } while (detail::advance(radices, digits));
  return sum;
}

RefinedExpectation gaussian_factor_expectation(const GaussianModel& model,
                                               std::span<const std::size_t> tuple,
                                               std::size_t nodes_per_axis, double tolerance,
                                               const QuadratureOptions& options) {
  RefinedExpectation out;
  const auto coarse = axis_rules(model, nodes_per_axis);
  const auto fine = axis_rules(model, 2 * nodes_per_axis);
  out.value = tensor_expectation(model, tuple, coarse, options);
  out.refined = tensor_expectation(model, tuple, fine, options);
  out.difference = std::abs(out.value - out.refined);
  out.converged = out.difference <= tolerance * std::max(1.0, std::abs(out.refined));
  return out;
}

GaussianPartitionFunction::GaussianPartitionFunction(const GaussianModel& model,
                                                     std::size_t nodes_per_axis,
                                                     double max_total_nodes) {
  const auto rules = axis_rules(model, nodes_per_axis);
  std::vector<std::size_t> axes(model.n);
  for (std::size_t j = 0; j < model.n; ++j) axes[j] = j;
  const std::size_t count = count_nodes(rules, axes, max_total_nodes);
  std::vector<std::size_t> radices(model.n);
  for (std::size_t j = 0; j < model.n; ++j) radices[j] = rules[j].nodes.size();
  std::vector<std::size_t> digits(model.n, 0);
  std::vector<double> x(model.n), local;
  weight_.reserve(count);
  energy_.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    double w = 1.0;
    for (std::size_t j = 0; j < model.n; ++j) {
      x[j] = rules[j].nodes[digits[j]];
      w *= rules[j].weights[digits[j]];
    }
    cd f{0.0, 0.0};
    for (const auto& factor : model.factors) {
      local.clear();
      for (auto j : factor.scope) local.push_back(x[j]);
      f += factor.evaluate(local);
    }
    weight_.push_back(w);
    energy_.push_back(f);
    detail::advance(radices, digits);
  }
}

cd GaussianPartitionFunction::value(cd z) const {
  return chunked_sum<cd>(energy_.size(), 4096, [&](std::size_t begin, std::size_t end) {
    cd sum{0.0, 0.0};
    for (std::size_t i = begin; i < end; ++i) sum += weight_[i] * std::exp(z * energy_[i]);
    return sum;
  });
}

double GaussianPartitionFunction::max_abs_energy() const {
  double worst = 0.0;
  for (const auto& e : energy_) worst = std::max(worst, std::abs(e));
  return worst;
}

GaussianOracleResult exact_gaussian_partition(const GaussianModel& model, cd lambda,
                                              std::size_t axis_nodes,
                                              const GaussianOracleOptions& options) {
  if (model.n > 3) throw DomainError("dense Gaussian oracle supports n <= 3");
  if (axis_nodes == 0) throw DomainError("axis node count must be positive");
  GaussianOracleResult out;
  std::size_t d = axis_nodes;
  out.value = GaussianPartitionFunction(model, d, options.max_total_nodes).value(lambda);
  out.previous = out.value;
  out.nodes_per_axis = d;
  while (true) {
    const std::size_t next = 2 * d;
    if (next > options.max_nodes_per_axis ||
        std::pow(static_cast<double>(next), static_cast<double>(model.n)) > options.max_total_nodes)
      return out;
    out.previous = out.value;
    out.value = GaussianPartitionFunction(model, next, options.max_total_nodes).value(lambda);
    out.nodes_per_axis = d = next;
    if (std::abs(out.value - out.previous) <= options.relative_tolerance * std::abs(out.value)) {
      out.converged = true;
      return out;
    }
  }
}

namespace {

struct MomentAccumulator {
  std::vector<cd> values;
  MomentAccumulator& operator+=(const MomentAccumulator& other) {
    if (values.size() < other.values.size()) values.resize(other.values.size());
    for (std::size_t s = 0; s < other.values.size(); ++s) values[s] += other.values[s];
    return *this;
  }
};

std::vector<cd> dense_moments(const GaussianModel& model, std::size_t max_order,
                              std::span<const QuadratureRule> rules, double ceiling) {
  std::vector<std::size_t> axes(model.n);
  for (std::size_t j = 0; j < model.n; ++j) axes[j] = j;
  const std::size_t count = count_nodes(rules, axes, ceiling);
  std::vector<std::size_t> radices(model.n);
  for (std::size_t j = 0; j < model.n; ++j) radices[j] = rules[j].nodes.size();
  auto total = chunked_sum<MomentAccumulator>(count, 4096, [&](std::size_t begin, std::size_t end) {
    MomentAccumulator acc{std::vector<cd>(max_order + 1)};
    std::vector<std::size_t> digits(model.n);
    std::vector<double> x(model.n), local;
    detail::decode_index(begin, radices, digits);
    for (std::size_t idx = begin; idx < end; ++idx) {
      double w = 1.0;
      for (std::size_t j = 0; j < model.n; ++j) {
        x[j] = rules[j].nodes[digits[j]];
        w *= rules[j].weights[digits[j]];
      }
      cd f{0.0, 0.0};
      for (const auto& factor : model.factors) {
        local.clear();
        for (auto j : factor.scope) local.push_back(x[j]);
        f += factor.evaluate(local);
      }
      cd power{w, 0.0};
      for (std::size_t s = 0; s <= max_order; ++s) {
        acc.values[s] += power;
        power *= f;
      }
      detail::advance(radices, digits);
    }
    return acc;
  });
  total.values.resize(max_order + 1);
  return total.values;
}

// Upper bound on |phi - offset| over the box spanned by the extreme nodes.
double box_sup(const GaussianFactor& f, std::span<const QuadratureRule> rules) {
  std::vector<double> lo, hi;
  for (auto j : f.scope) {
    const auto [mn, mx] = std::minmax_element(rules[j].nodes.begin(), rules[j].nodes.end());
    lo.push_back(*mn);
    hi.push_back(*mx);
  }
  GaussianFactor plain = f;
  plain.clamp.reset();
  if (f.kind == GaussianFactorKind::piecewise_linear_of_sum) {
    double a = 0.0, b = 0.0;
    for (std::size_t p = 0; p < lo.size(); ++p) {
      a += lo[p];
      b += hi[p];
    }
    // |linear - const| is convex on each segment: check the ends and knots.
    std::vector<double> ts{a, b};
    for (std::size_t i = 0; i + 3 <= f.params.size(); i += 3)
      if (f.params[i] > a && f.params[i] < b) ts.push_back(f.params[i]);
    double worst = 0.0;
    for (double t : ts) {
      std::vector<double> x(f.scope.size(), 0.0);
      x[0] = t;
      worst = std::max(worst, std::abs(plain.evaluate(x)));
    }
    return worst;
  }
  // Convex non-negative kinds: the maximum of the raw value is at a corner.
  double raw_max = 0.0;
  const std::size_t corners = std::size_t{1} << f.scope.size();
  std::vector<double> x(f.scope.size());
  for (std::size_t mask = 0; mask < corners; ++mask) {
    for (std::size_t p = 0; p < x.size(); ++p) x[p] = (mask >> p) & 1 ? hi[p] : lo[p];
    raw_max = std::max(raw_max, plain.raw(x).real());
  }
  const double offset = std::abs(f.offset);
  return std::max(raw_max - f.offset.real(), offset);
}

struct ShiftedGaussian {
  GaussianModel model;
  cd gamma{0.0, 0.0};
};

ShiftedGaussian shift_at_origin(const GaussianModel& model) {
  ShiftedGaussian out{model, {0.0, 0.0}};
  for (auto& f : out.model.factors) {
    std::vector<double> zero(f.scope.size(), 0.0);
    f.offset = f.raw(zero);
    f.clamp.reset();
    out.gamma += f.offset;
  }
  return out;
}

double auto_truncation(const GaussianModel& shifted, std::span<const QuadratureRule> rules) {
  double worst = 0.0;
  for (const auto& f : shifted.factors) worst = std::max(worst, box_sup(f, rules));
  return worst > 0.0 ? 1.05 * worst : 1.0;
}

}  // namespace

MomentSequence gaussian_moment_sequence(const GaussianModel& model, std::size_t max_order,
                                        std::span<const QuadratureRule> rules,
                                        const MomentOptions& options) {
  double per_axis = 1.0;
  for (const auto& r : rules) per_axis = std::max(per_axis, static_cast<double>(r.nodes.size()));
  double dense_nodes = 1.0;
  for (const auto& r : rules) dense_nodes *= static_cast<double>(r.nodes.size());
  const double enum_cost = dense_nodes * static_cast<double>(model.num_factors() + max_order + 1);
  const double multi_cost =
      multiset_cost_estimate(model.num_factors(), per_axis, model.arity(), model.n, max_order);
  MomentSequence out;
  MomentMethod method = options.method;
  if (method == MomentMethod::automatic)
    method = multi_cost <= enum_cost ? MomentMethod::multiset : MomentMethod::enumeration;
  out.method = method;
  out.estimated_cost = method == MomentMethod::multiset ? multi_cost : enum_cost;
  if (out.estimated_cost > options.cost_ceiling)
    throw BudgetError("Gaussian moment computation exceeds the cost ceiling");
  if (method == MomentMethod::enumeration) {
    out.values = dense_moments(model, max_order, rules, options.cost_ceiling);
  } else {
    std::vector<std::vector<std::size_t>> scopes;
    for (const auto& f : model.factors) scopes.push_back(f.scope);
    MomentEngine engine(std::move(scopes), [&](const std::vector<std::size_t>& tuple) {
      return tensor_expectation(model, tuple, rules, {options.cost_ceiling});
    });
    out.values.resize(max_order + 1);
    for (std::size_t s = 0; s <= max_order; ++s) out.values[s] = engine.power_moment(s);
  }
  out.values[0] = {1.0, 0.0};
  return out;
}

GaussianApproxReport approximate_gaussian_partition(const GaussianModel& model, cd lambda,
                                                    double epsilon, double delta,
                                                    const GaussianApproxOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  require_admissible(model);
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (options.nodes_per_axis == 0) throw DomainError("axis node count must be positive");

  GaussianApproxReport out;
  out.nodes_per_axis = options.nodes_per_axis;
  auto shifted = shift_at_origin(model);
  const auto coarse = axis_rules(model, options.nodes_per_axis);
  const auto fine = axis_rules(model, 2 * options.nodes_per_axis);
  out.truncation_auto = !(options.truncation_L > 0.0);
  out.truncation_L = out.truncation_auto ? auto_truncation(shifted.model, fine) : options.truncation_L;
  for (auto& f : shifted.model.factors) f = truncate_factor(f, out.truncation_L);

  PlanInputs in;
  in.lambda = lambda;
  in.epsilon = epsilon;
  in.delta = delta;
  in.radius = gaussian_zero_free_radius(model.arity(), model.multiplicity(), delta);
  in.total_bound = model.num_factors() == 0
                       ? 0.0
                       : static_cast<double>(model.num_factors()) * out.truncation_L;
  const GaussianModel& truncated = shifted.model;
  const double L = out.truncation_L;
  in.log_lower = [&truncated, L](double modulus) {
    return gaussian_magnitude_bounds(truncated, L, modulus).log_lower;
  };

  ApproxReport& report = out.report;
  report.plan = make_plan(in, options.limits);
  report.shift.gamma = shifted.gamma;

  const auto moments_start = clock::now();
  cd log_coarse{0.0, 0.0}, log_fine{0.0, 0.0};
  if (report.plan.k > 0) {
    auto seq = gaussian_moment_sequence(truncated, report.plan.moment_order, coarse, options.moments);
    out.moment_method = report.moment_method = seq.method;
    log_coarse = interpolated_log_value(report.plan, seq.values);
    auto refined = gaussian_moment_sequence(truncated, report.plan.moment_order, fine, options.moments);
    log_fine = interpolated_log_value(report.plan, refined.values);
  }
  const auto moments_end = clock::now();

  report.log_value = log_coarse + lambda * shifted.gamma;
  report.value = std::exp(report.log_value);
  out.refined_log_value = log_fine + lambda * shifted.gamma;
  out.quadrature_residual = std::abs(log_coarse - log_fine);
  report.epsilon_guarantee = report.plan.epsilon_guarantee;
  report.timings.moments_ms =
      std::chrono::duration<double, std::milli>(moments_end - moments_start).count();
  report.timings.total_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return out;
}

GaussianDiscScan scan_gaussian_disc(const GaussianModel& model, std::size_t grid,
                                    std::size_t nodes_per_axis) {
  require_admissible(model);
  if (model.n > 3) throw DomainError("Gaussian disc scan supports n <= 3");
  if (grid < 2) throw DomainError("grid must have at least 2 points per axis");
  GaussianDiscScan out;
  out.radius = gaussian_zero_free_radius(model.arity(), model.multiplicity(), 0.0);
  auto shifted = shift_at_origin(model);
  const auto fine = axis_rules(model, 2 * nodes_per_axis);
  out.truncation_L = auto_truncation(shifted.model, fine);
  for (auto& f : shifted.model.factors) f = truncate_factor(f, out.truncation_L);
  out.log_lower = gaussian_magnitude_bounds(shifted.model, out.truncation_L, out.radius).log_lower;

  const GaussianPartitionFunction coarse_fn(shifted.model, nodes_per_axis);
  const GaussianPartitionFunction fine_fn(shifted.model, 2 * nodes_per_axis);
  std::vector<cd> points;
  const double step = 2.0 * out.radius / static_cast<double>(grid - 1);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j) {
      const cd z{-out.radius + step * static_cast<double>(i), -out.radius + step * static_cast<double>(j)};
      if (std::abs(z) <= out.radius * (1.0 + 1e-12)) points.push_back(z);
    }
  for (std::size_t k = 0; k < 32; ++k)
    points.push_back(std::polar(out.radius, 2.0 * std::numbers::pi * static_cast<double>(k) / 32.0));
  std::vector<double> modulus(points.size());
  parallel_for(points.size(), [&](std::size_t p) { modulus[p] = std::abs(coarse_fn.value(points[p])); });
  out.min_modulus = *std::min_element(modulus.begin(), modulus.end());
  for (std::size_t k = 0; k < 32; ++k) {
    const cd z = points[points.size() - 32 + k];
    out.quadrature_residual =
        std::max(out.quadrature_residual, std::abs(coarse_fn.value(z) - fine_fn.value(z)));
  }
  out.zero_free = out.min_modulus >= std::exp(out.log_lower) - out.quadrature_residual;
  return out;
}

}  // namespace multispin
