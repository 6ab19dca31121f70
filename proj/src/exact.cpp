#include "multispin/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "multispin/detail/odometer.hpp"
#include "multispin/errors.hpp"
#include "multispin/parallel.hpp"

namespace multispin {

namespace {

constexpr std::size_t kChunk = 4096;

struct PairSum {
  cd value{0.0, 0.0};
  cd derivative{0.0, 0.0};
  PairSum& operator+=(const PairSum& o) {
    value += o.value;
    derivative += o.derivative;
    return *this;
  }
};

void require_structure(const SpinSystem& system) {
  const auto report = validate_system(system);
  if (!report.structure_ok) throw ValidationError(report.structural_errors.front());
}

std::vector<std::vector<double>> log_probabilities(const SpinSystem& system) {
  std::vector<std::vector<double>> logs(system.num_coordinates());
  for (std::size_t j = 0; j < logs.size(); ++j)
    for (double p : system.spaces[j].probs)
      logs[j].push_back(p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity());
  return logs;
}

std::size_t checked_count(const SpinSystem& system, const ExactOptions& options) {
  const double count = system.configuration_count();
  if (count > options.max_configurations)
    throw BudgetError("full enumeration of " + std::to_string(count) +
                      " configurations exceeds the ceiling");
  return static_cast<std::size_t>(count);
}

std::vector<std::size_t> radices_of(const SpinSystem& system) {
  std::vector<std::size_t> radices(system.num_coordinates());
  for (std::size_t j = 0; j < radices.size(); ++j) radices[j] = system.spaces[j].size;
  return radices;
}

}  // namespace

cd exact_partition(const SpinSystem& system, cd lambda, const ExactOptions& options) {
  require_structure(system);
  const std::size_t count = checked_count(system, options);
  const auto logs = log_probabilities(system);
  const auto radices = radices_of(system);
  const std::size_t n = radices.size();
  return chunked_sum<cd>(count, kChunk, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> digits(n);
    detail::decode_index(begin, radices, digits);
    cd sum{0.0, 0.0};
    for (std::size_t idx = begin; idx < end; ++idx) {
      double log_weight = 0.0;
      for (std::size_t j = 0; j < n; ++j) log_weight += logs[j][digits[j]];
      if (std::isfinite(log_weight)) sum += std::exp(log_weight + lambda * system.total(digits));
      detail::advance(radices, digits);
    }
    return sum;
  });
}

PartitionFunction::PartitionFunction(const SpinSystem& system, const ExactOptions& options) {
  require_structure(system);
  const std::size_t count = checked_count(system, options);
  const auto logs = log_probabilities(system);
  const auto radices = radices_of(system);
  std::vector<std::size_t> digits(radices.size(), 0);
  log_weight_.reserve(count);
  energy_.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    double log_weight = 0.0;
    for (std::size_t j = 0; j < digits.size(); ++j) log_weight += logs[j][digits[j]];
    if (std::isfinite(log_weight)) {
      log_weight_.push_back(log_weight);
      energy_.push_back(system.total(digits));
    }
    detail::advance(radices, digits);
  }
}

cd PartitionFunction::value(cd z) const {
  return chunked_sum<cd>(energy_.size(), kChunk, [&](std::size_t begin, std::size_t end) {
    cd sum{0.0, 0.0};
    for (std::size_t i = begin; i < end; ++i) sum += std::exp(log_weight_[i] + z * energy_[i]);
    return sum;
  });
}

ValueAndDerivative PartitionFunction::evaluate(cd z) const {
  auto total = chunked_sum<PairSum>(energy_.size(), kChunk, [&](std::size_t begin, std::size_t end) {
    PairSum sum;
    for (std::size_t i = begin; i < end; ++i) {
      const cd term = std::exp(log_weight_[i] + z * energy_[i]);
      sum.value += term;
      sum.derivative += energy_[i] * term;
    }
    return sum;
  });
  return {total.value, total.derivative};
}

AnalyticFunction PartitionFunction::as_function() const {
  return [this](cd z) { return evaluate(z); };
}

int winding_number(const AnalyticFunction& fn, cd center, double radius, std::size_t samples,
                   const WindingOptions& options) {
  if (samples < 64) throw DomainError("winding number needs at least 64 samples");
  if (!(radius > 0.0)) throw DomainError("circle radius must be positive");
  for (std::size_t count = samples;; count *= 2) {
    std::vector<cd> values(count);
    parallel_for(count, [&](std::size_t j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(count);
      values[j] = fn(center + std::polar(radius, angle)).value;
    });
    double max_modulus = 0.0;
    for (const auto& v : values) max_modulus = std::max(max_modulus, std::abs(v));
    for (const auto& v : values)
      if (std::abs(v) <= options.zero_tolerance * max_modulus)
        throw ConvergenceError("circle passes through or near a zero");
    double total = 0.0, worst = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double step = std::arg(values[(j + 1) % count] / values[j]);
      total += step;
      worst = std::max(worst, std::abs(step));
    }
    if (worst <= options.max_arg_step)
      return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    if (count * 2 > options.max_samples)
      throw ConvergenceError("argument increments unresolved; increase samples");
  }
}

int winding_number(const SpinSystem& system, cd center, double radius, std::size_t samples,
                   const WindingOptions& options) {
  PartitionFunction pf(system);
  return winding_number(pf.as_function(), center, radius, samples, options);
}

std::pair<LocatedZero, bool> polish_zero(const AnalyticFunction& fn, cd seed, double tolerance,
                                         std::size_t max_iterations, cd region_center,
                                         double region_radius) {
  cd z = seed;
  auto current = fn(z);
  double residual = std::abs(current.value);
  for (std::size_t it = 0; it < max_iterations && residual > 0.0; ++it) {
    if (current.derivative == cd{0.0, 0.0}) break;
    const cd step = current.value / current.derivative;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
    bool accepted = false;
    for (double t = 1.0; t >= 1.0 / 1024.0; t *= 0.5) {
      const cd trial = z - t * step;
      auto next = fn(trial);
      if (std::abs(next.value) < residual) {
        z = trial;
        current = next;
        residual = std::abs(next.value);
        accepted = true;
        break;
      }
    }
    if (!accepted || std::abs(z - region_center) > region_radius) break;
  }
  return {LocatedZero{z, residual}, residual <= tolerance};
}

ZeroScanReport scan_zeros(const AnalyticFunction& fn, double disc_radius, std::size_t grid,
                          const ScanOptions& options) {
  if (!(disc_radius > 0.0)) throw DomainError("disc radius must be positive");
  if (grid < 2) throw DomainError("grid must have at least 2 points per axis");
  ZeroScanReport report;
  report.disc_radius = disc_radius;
  report.center = options.center;
  const cd c = options.center;

  auto point = [&](std::size_t i, std::size_t j) {
    const double step = 2.0 * disc_radius / static_cast<double>(grid - 1);
    return c + cd{-disc_radius + step * static_cast<double>(i), -disc_radius + step * static_cast<double>(j)};
  };
  auto inside = [&](cd z) { return std::abs(z - c) <= disc_radius * (1.0 + 1e-12); };

  std::vector<double> modulus(grid * grid, std::numeric_limits<double>::quiet_NaN());
  parallel_for(grid * grid, [&](std::size_t idx) {
    const cd z = point(idx / grid, idx % grid);
    if (inside(z)) modulus[idx] = std::abs(fn(z).value);
  });
  report.grid_min = std::numeric_limits<double>::infinity();
  for (double v : modulus)
    if (!std::isnan(v)) {
      report.grid_max = std::max(report.grid_max, v);
      report.grid_min = std::min(report.grid_min, v);
    }
  const double tolerance = options.residual_tolerance * report.grid_max;

  std::vector<cd> seeds;
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j) {
      const double v = modulus[i * grid + j];
      if (std::isnan(v)) continue;
      bool minimum = true, strict = false;
      for (int di = -1; di <= 1 && minimum; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const auto ni = static_cast<std::ptrdiff_t>(i) + di;
          const auto nj = static_cast<std::ptrdiff_t>(j) + dj;
          if (ni < 0 || nj < 0 || ni >= static_cast<std::ptrdiff_t>(grid) ||
              nj >= static_cast<std::ptrdiff_t>(grid))
            continue;
          const double w = modulus[static_cast<std::size_t>(ni) * grid + static_cast<std::size_t>(nj)];
          if (std::isnan(w)) continue;
          if (w < v) {
            minimum = false;
            break;
          }
          if (w > v) strict = true;
        }
      if (minimum && strict) seeds.push_back(point(i, j));
    }
  report.newton_seeds = seeds.size();

  std::vector<std::pair<LocatedZero, bool>> polished(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    polished[s] = polish_zero(fn, seeds[s], tolerance, options.newton_max_iterations, c,
                              2.0 * disc_radius);
  });
  for (const auto& [zero, ok] : polished) {
    if (!ok) {
      ++report.newton_failures;
      continue;
    }
    if (!inside(zero.z)) continue;
    auto dup = std::find_if(report.zeros.begin(), report.zeros.end(), [&](const LocatedZero& other) {
      return std::abs(other.z - zero.z) <= options.dedup_radius;
    });
    if (dup == report.zeros.end())
      report.zeros.push_back(zero);
    else if (zero.residual < dup->residual)
      *dup = zero;
  }
  std::sort(report.zeros.begin(), report.zeros.end(), [](const LocatedZero& a, const LocatedZero& b) {
    if (std::abs(a.z) != std::abs(b.z)) return std::abs(a.z) < std::abs(b.z);
    if (a.z.imag() != b.z.imag()) return a.z.imag() > b.z.imag();
    return a.z.real() < b.z.real();
  });
  if (!report.zeros.empty()) report.min_modulus_zero = report.zeros.front().z;

  for (double fraction : {1.0 / 3.0, 2.0 / 3.0, 1.0}) {
    WindingEvidence evidence;
    bool resolved = false;
    for (int attempt = 0; attempt < 6 && !resolved; ++attempt) {
      evidence.circle_radius = disc_radius * fraction * (1.0 - 0.01 * attempt);
      try {
        evidence.winding = winding_number(fn, c, evidence.circle_radius, options.winding_samples);
        resolved = true;
      } catch (const ConvergenceError&) {
      }
    }
    if (!resolved) {
      evidence.winding = -1;
      report.consistent = false;
    }
    evidence.roots_inside = static_cast<std::size_t>(
        std::count_if(report.zeros.begin(), report.zeros.end(),
                      [&](const LocatedZero& z) { return std::abs(z.z - c) < evidence.circle_radius; }));
    if (resolved && static_cast<int>(evidence.roots_inside) != evidence.winding) report.consistent = false;
    report.winding_evidence.push_back(evidence);
  }
  return report;
}

ZeroScanReport scan_zeros(const SpinSystem& system, double disc_radius, std::size_t grid,
                          const ScanOptions& options) {
  PartitionFunction pf(system);
  return scan_zeros(pf.as_function(), disc_radius, grid, options);
}

}  // namespace multispin
