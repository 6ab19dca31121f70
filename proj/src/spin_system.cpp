#include "multispin/spin_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "multispin/errors.hpp"

namespace multispin {

Space Space::uniform(std::size_t size) {
  if (size == 0) throw DomainError("space size must be positive");
  return Space{size, std::vector<double>(size, 1.0 / static_cast<double>(size))};
}

std::size_t SpinSystem::arity() const {
  std::size_t r = 2;
  for (const auto& f : factors) r = std::max(r, f.scope.size());
  return r;
}

std::size_t SpinSystem::multiplicity() const {
  std::vector<std::size_t> count(spaces.size(), 0);
  for (const auto& f : factors)
    for (auto j : f.scope)
      if (j < count.size()) ++count[j];
  std::size_t c = 1;
  for (auto k : count) c = std::max(c, k);
  return c;
}

std::size_t SpinSystem::max_states() const {
  std::size_t q = 0;
  for (const auto& s : spaces) q = std::max(q, s.size);
  return q;
}

double SpinSystem::configuration_count() const {
  double total = 1.0;
  for (const auto& s : spaces) total *= static_cast<double>(s.size);
  return total;
}

std::vector<std::size_t> table_strides(const SpinSystem& system, const Factor& factor) {
  std::vector<std::size_t> strides(factor.scope.size(), 1);
  for (std::size_t p = factor.scope.size(); p-- > 1;)
    strides[p - 1] = strides[p] * system.spaces[factor.scope[p]].size;
  return strides;
}

cd SpinSystem::factor_value(std::size_t i, std::span<const std::size_t> config) const {
  const Factor& f = factors[i];
  std::size_t index = 0;
  for (std::size_t p = 0; p < f.scope.size(); ++p)
    index = index * spaces[f.scope[p]].size + config[f.scope[p]];
  return f.table[index];
}

cd SpinSystem::total(std::span<const std::size_t> config) const {
  cd sum{0.0, 0.0};
  for (std::size_t i = 0; i < factors.size(); ++i) sum += factor_value(i, config);
  return sum;
}

double SpinSystem::sup_norm() const {
  double L = 0.0;
  for (const auto& f : factors)
    for (const auto& v : f.table) L = std::max(L, std::abs(v));
  return L;
}

namespace {

void check_structure(const SpinSystem& system, ValidationReport& report) {
  auto fail = [&](const std::string& msg) {
    report.structure_ok = false;
    report.structural_errors.push_back(msg);
  };
  for (std::size_t j = 0; j < system.spaces.size(); ++j) {
    const Space& s = system.spaces[j];
    std::ostringstream where;
    where << "space " << j << ": ";
    if (s.size == 0) fail(where.str() + "size must be positive");
    if (s.probs.size() != s.size) {
      fail(where.str() + "probs length differs from size");
      continue;
    }
    double total = 0.0;
    for (double p : s.probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) fail(where.str() + "negative or non-finite probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance)
      fail(where.str() + "probabilities do not sum to 1");
  }
  for (std::size_t i = 0; i < system.factors.size(); ++i) {
    const Factor& f = system.factors[i];
    std::ostringstream where;
    where << "factor " << i << ": ";
    bool scope_ok = true;
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      if (f.scope[p] >= system.spaces.size()) {
        fail(where.str() + "scope index " + std::to_string(f.scope[p]) + " out of range");
        scope_ok = false;
      }
      for (std::size_t q = 0; q < p; ++q)
        if (f.scope[q] == f.scope[p]) {
          fail(where.str() + "repeated scope index " + std::to_string(f.scope[p]));
          scope_ok = false;
        }
    }
    if (!scope_ok) continue;
    std::size_t expected = 1;
    for (auto j : f.scope) expected *= system.spaces[j].size;
    if (f.table.size() != expected)
      fail(where.str() + "table length " + std::to_string(f.table.size()) + " != " +
           std::to_string(expected));
    for (const auto& v : f.table)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        fail(where.str() + "non-finite table entry");
        break;
      }
  }
}

void check_lipschitz(const SpinSystem& system, ValidationReport& report) {
  for (std::size_t i = 0; i < system.factors.size(); ++i) {
    const Factor& f = system.factors[i];
    const auto strides = table_strides(system, f);
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      const std::size_t size = system.spaces[f.scope[p]].size;
      double worst = 0.0;
      for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
        const std::size_t state = (idx / strides[p]) % size;
        for (std::size_t other = state + 1; other < size; ++other) {
          const std::size_t jdx = idx + (other - state) * strides[p];
          worst = std::max(worst, std::abs(f.table[idx] - f.table[jdx]));
        }
      }
      report.worst_violation = std::max(report.worst_violation, worst);
      if (worst > 1.0 + kLipschitzTolerance) {
        report.lipschitz_ok = false;
        report.violations.push_back({i, f.scope[p], worst});
      }
    }
  }
}

}  // namespace

ValidationReport validate_system(const SpinSystem& system) {
  ValidationReport report;
  report.n = system.num_coordinates();
  report.m = system.num_factors();
  check_structure(system, report);
  if (!report.structure_ok) {
    report.lipschitz_ok = false;
    return report;
  }
  report.q = system.max_states();
  report.r = system.arity();
  report.c = system.multiplicity();
  check_lipschitz(system, report);
  return report;
}

void require_admissible(const SpinSystem& system) {
  const auto report = validate_system(system);
  if (!report.structure_ok) throw ValidationError(report.structural_errors.front());
  if (!report.lipschitz_ok) {
    const auto& v = report.violations.front();
    std::ostringstream msg;
    msg.precision(17);
    msg << "factor " << v.factor << " is not 1-Lipschitz in coordinate " << v.coordinate
        << " (change " << v.magnitude << ")";
    throw ValidationError(msg.str());
  }
}

std::vector<std::size_t> default_anchor(const SpinSystem& system) {
  return std::vector<std::size_t>(system.num_coordinates(), 0);
}

ShiftedSystem shift_factors(const SpinSystem& system, std::span<const std::size_t> anchor) {
  if (anchor.size() != system.num_coordinates())
    throw DomainError("anchor length differs from the number of coordinates");
  for (std::size_t j = 0; j < anchor.size(); ++j)
    if (anchor[j] >= system.spaces[j].size)
      throw DomainError("anchor state " + std::to_string(anchor[j]) + " invalid for coordinate " +
                        std::to_string(j));
  ShiftedSystem out{system, ShiftRecord{{anchor.begin(), anchor.end()}, cd{0.0, 0.0}}};
  for (std::size_t i = 0; i < system.factors.size(); ++i) {
    const cd base = system.factor_value(i, anchor);
    out.shift.gamma += base;
    for (auto& v : out.system.factors[i].table) v -= base;
  }
  return out;
}

double zero_free_radius(std::size_t r, std::size_t c, double delta) {
  if (r < 2) throw DomainError("r must be at least 2");
  if (c < 1) throw DomainError("c must be at least 1");
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("delta must lie in [0, 1)");
  return (1.0 - delta) / (3.0 * static_cast<double>(c) * std::sqrt(static_cast<double>(r - 1)));
}

bool within_radius(double modulus, double radius) {
  return modulus <= radius * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
}

MagnitudeBounds magnitude_bounds(const MagnitudeInputs& in, double lambda_modulus) {
  if (!(lambda_modulus >= 0.0)) throw DomainError("lambda modulus must be non-negative");
  if (!within_radius(lambda_modulus, zero_free_radius(in.r, in.c, 0.0)))
    throw InadmissibleError("|lambda| exceeds the zero-free radius 1/(3c sqrt(r-1))");
  MagnitudeBounds b;
  b.sup_bound = in.sup_bound;
  if (in.m == 0 || in.sup_bound == 0.0) return b;
  const double drift = lambda_modulus * static_cast<double>(in.m) * in.sup_bound;
  const double angle = std::numbers::pi / (4.0 * std::sqrt(static_cast<double>(in.r - 1)));
  b.log_upper = drift;
  b.log_lower = -drift + static_cast<double>(in.n) * std::log(std::cos(angle));
  return b;
}

MagnitudeBounds magnitude_bounds(const SpinSystem& shifted, double lambda_modulus) {
  MagnitudeInputs in{shifted.num_coordinates(), shifted.num_factors(), shifted.arity(),
                     shifted.multiplicity(), shifted.sup_norm()};
  return magnitude_bounds(in, lambda_modulus);
}

}  // namespace multispin
