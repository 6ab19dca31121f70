#include "multispin/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multispin/detail/odometer.hpp"
#include "multispin/errors.hpp"
#include "multispin/parallel.hpp"

namespace multispin {

const char* to_string(MomentMethod method) {
  switch (method) {
    case MomentMethod::automatic: return "automatic";
    case MomentMethod::multiset: return "multiset";
    case MomentMethod::enumeration: return "enumeration";
  }
  return "unknown";
}

MomentMethod moment_method_from_string(const std::string& name) {
  if (name == "automatic" || name == "auto") return MomentMethod::automatic;
  if (name == "multiset") return MomentMethod::multiset;
  if (name == "enumeration") return MomentMethod::enumeration;
  throw DomainError("unknown moment method '" + name + "'");
}

namespace {

// Row-major enumeration over the union of the scopes of `tuple`.
cd union_expectation(const SpinSystem& system, std::span<const std::size_t> tuple) {
  std::vector<std::size_t> coords;
  for (auto i : tuple) {
    const auto& scope = system.factors[i].scope;
    coords.insert(coords.end(), scope.begin(), scope.end());
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

  std::vector<std::size_t> radices(coords.size());
  for (std::size_t p = 0; p < coords.size(); ++p) radices[p] = system.spaces[coords[p]].size;

  // For each factor in the tuple: (union position, table stride) pairs.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> layout(tuple.size());
  for (std::size_t t = 0; t < tuple.size(); ++t) {
    const Factor& f = system.factors[tuple[t]];
    const auto strides = table_strides(system, f);
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      auto pos = static_cast<std::size_t>(
          std::lower_bound(coords.begin(), coords.end(), f.scope[p]) - coords.begin());
      layout[t].emplace_back(pos, strides[p]);
    }
  }

  std::vector<std::size_t> digits(coords.size(), 0);
  cd sum{0.0, 0.0};
  do {
    double weight = 1.0;
    for (std::size_t p = 0; p < coords.size(); ++p)
      weight *= system.spaces[coords[p]].probs[digits[p]];
    if (weight == 0.0) continue;
    cd product{1.0, 0.0};
    for (std::size_t t = 0; t < tuple.size(); ++t) {
      std::size_t index = 0;
      for (auto [pos, stride] : layout[t]) index += digits[pos] * stride;
      product *= system.factors[tuple[t]].table[index];
    }
    sum += weight * product;
  } while (detail::advance(radices, digits));
  return sum;
}

// Splits a sorted tuple into groups whose scopes are connected.
std::vector<std::vector<std::size_t>> split_components(
    const std::vector<std::vector<std::size_t>>& scopes, std::span<const std::size_t> tuple) {
  const std::size_t k = tuple.size();
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::map<std::size_t, std::size_t> owner;
  for (std::size_t t = 0; t < k; ++t)
    for (auto j : scopes[tuple[t]]) {
      auto [it, inserted] = owner.emplace(j, t);
      if (!inserted) parent[find(t)] = find(it->second);
    }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < k; ++t) groups[find(t)].push_back(tuple[t]);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double multinomial(std::span<const std::size_t> counts) {
  double weight = 1.0;
  std::size_t running = 0;
  for (auto c : counts)
    for (std::size_t t = 1; t <= c; ++t) {
      ++running;
      weight = weight * static_cast<double>(running) / static_cast<double>(t);
    }
  return std::round(weight);
}

void collect_multisets(std::size_t m, std::size_t s, std::vector<std::size_t>& current,
                       std::size_t start, std::vector<std::vector<std::size_t>>& out) {
  if (current.size() == s) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < m; ++i) {
    current.push_back(i);
    collect_multisets(m, s, current, i, out);
    current.pop_back();
  }
}

double binomial(double n, double k) {
  return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
}

struct MomentAccumulator {
  std::vector<cd> values;
  MomentAccumulator& operator+=(const MomentAccumulator& other) {
    if (values.size() < other.values.size()) values.resize(other.values.size());
    for (std::size_t s = 0; s < other.values.size(); ++s) values[s] += other.values[s];
    return *this;
  }
};

std::vector<cd> enumeration_moments(const SpinSystem& system, std::size_t max_order) {
  const std::size_t n = system.num_coordinates();
  std::vector<std::size_t> radices(n);
  for (std::size_t j = 0; j < n; ++j) radices[j] = system.spaces[j].size;
  const auto count = static_cast<std::size_t>(system.configuration_count());
  auto partial = [&](std::size_t begin, std::size_t end) {
    MomentAccumulator acc{std::vector<cd>(max_order + 1)};
    std::vector<std::size_t> digits(n);
    detail::decode_index(begin, radices, digits);
    for (std::size_t idx = begin; idx < end; ++idx) {
      double weight = 1.0;
      for (std::size_t j = 0; j < n; ++j) weight *= system.spaces[j].probs[digits[j]];
      if (weight != 0.0) {
        const cd f = system.total(digits);
        cd power{weight, 0.0};
        for (std::size_t s = 0; s <= max_order; ++s) {
          acc.values[s] += power;
          power *= f;
        }
      }
      detail::advance(radices, digits);
    }
    return acc;
  };
  auto total = chunked_sum<MomentAccumulator>(count, 4096, partial);
  total.values.resize(max_order + 1);
  return total.values;
}

}  // namespace

MomentEngine::MomentEngine(const SpinSystem& system) {
  for (const auto& f : system.factors) scopes_.push_back(f.scope);
  component_ = [&system](const std::vector<std::size_t>& tuple) {
    return union_expectation(system, tuple);
  };
}

MomentEngine::MomentEngine(std::vector<std::vector<std::size_t>> scopes, ComponentFn component)
    : scopes_(std::move(scopes)), component_(std::move(component)) {}

cd MomentEngine::component_expectation(const std::vector<std::size_t>& sorted_tuple) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(sorted_tuple); it != cache_.end()) return it->second;
  }
  const cd value = component_(sorted_tuple);
  std::lock_guard lock(mutex_);
  cache_.emplace(sorted_tuple, value);
  return value;
}

cd MomentEngine::multiset_expectation(std::span<const std::size_t> sorted_tuple) {
  cd product{1.0, 0.0};
  for (const auto& component : split_components(scopes_, sorted_tuple))
    product *= component_expectation(component);
  return product;
}

cd MomentEngine::power_moment(std::size_t s) {
  if (s == 0) return {1.0, 0.0};
  const std::size_t m = scopes_.size();
  std::vector<std::vector<std::size_t>> multisets;
  std::vector<std::size_t> current;
  collect_multisets(m, s, current, 0, multisets);
  std::vector<cd> terms(multisets.size());
  parallel_for(multisets.size(), [&](std::size_t t) {
    const auto& tuple = multisets[t];
    std::vector<std::size_t> counts;
    for (std::size_t p = 0; p < tuple.size();) {
      std::size_t q = p;
      while (q < tuple.size() && tuple[q] == tuple[p]) ++q;
      counts.push_back(q - p);
      p = q;
    }
    terms[t] = multinomial(counts) * multiset_expectation(tuple);
  });
  return pairwise_sum(std::move(terms));
}

cd factor_product_expectation(const SpinSystem& system, std::span<const std::size_t> tuple) {
  for (auto i : tuple)
    if (i >= system.num_factors())
      throw DomainError("factor index " + std::to_string(i) + " out of range");
  std::vector<std::size_t> sorted(tuple.begin(), tuple.end());
  std::sort(sorted.begin(), sorted.end());
  MomentEngine engine(system);
  return engine.multiset_expectation(sorted);
}

cd power_moment(const SpinSystem& system, std::size_t s) {
  MomentEngine engine(system);
  return engine.power_moment(s);
}

double multiset_route_cost(const SpinSystem& system, std::size_t max_order) {
  return multiset_cost_estimate(system.num_factors(),
                                static_cast<double>(std::max<std::size_t>(system.max_states(), 1)),
                                system.arity(), system.num_coordinates(), max_order);
}

double multiset_cost_estimate(std::size_t m_count, double states, std::size_t r_arity,
                              std::size_t n_coords, std::size_t max_order) {
  const double m = static_cast<double>(m_count);
  const double q = states;
  const double r = static_cast<double>(r_arity);
  const double n = static_cast<double>(n_coords);
  if (m == 0) return 0.0;
  double cost = 0.0;
  for (std::size_t s = 1; s <= max_order; ++s) {
    const double sd = static_cast<double>(s);
    cost += binomial(m + sd - 1, sd) * std::pow(q, std::min(sd * r, n));
  }
  return cost;
}

double enumeration_route_cost(const SpinSystem& system, std::size_t max_order) {
  return system.configuration_count() *
         static_cast<double>(system.num_factors() + max_order + 1);
}

MomentSequence moment_sequence(const MomentRequest& request) {
  const SpinSystem& system = request.system;
  const std::size_t N = request.max_order;
  MomentSequence out;
  const double multiset_cost = multiset_route_cost(system, N);
  const double enum_cost = enumeration_route_cost(system, N);
  MomentMethod method = request.options.method;
  if (method == MomentMethod::automatic)
    method = multiset_cost <= enum_cost ? MomentMethod::multiset : MomentMethod::enumeration;
  out.method = method;
  out.estimated_cost = method == MomentMethod::multiset ? multiset_cost : enum_cost;
  if (out.estimated_cost > request.options.cost_ceiling)
    throw BudgetError("moment computation up to order " + std::to_string(N) +
                      " exceeds the cost ceiling (estimated " +
                      std::to_string(out.estimated_cost) + " table reads)");

  if (method == MomentMethod::enumeration) {
    out.values = enumeration_moments(system, N);
  } else {
    MomentEngine engine(system);
    out.values.resize(N + 1);
    for (std::size_t s = 0; s <= N; ++s) out.values[s] = engine.power_moment(s);
  }
  out.values[0] = {1.0, 0.0};
  return out;
}

}  // namespace multispin
