#pragma once

// Power moments E f^s of a spin system. The multiset route expands f^s into
// expectations of factor products, each evaluated by enumerating the union of
// the scopes involved; the enumeration route sums w_x f(x)^s over the whole
// configuration space. Both return the same values.

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <span>
#include <vector>

#include "multispin/spin_system.hpp"

namespace multispin {

enum class MomentMethod { automatic, multiset, enumeration };

const char* to_string(MomentMethod method);
MomentMethod moment_method_from_string(const std::string& name);

struct MomentOptions {
  /// Ceiling on elementary table reads.
  double cost_ceiling = 1e9;
  MomentMethod method = MomentMethod::automatic;
};

struct MomentRequest {
  const SpinSystem& system;
  std::size_t max_order = 0;
  MomentOptions options = {};
};

struct MomentSequence {
  std::vector<cd> values;  // values[s] = E f^s, values[0] == 1
  MomentMethod method = MomentMethod::multiset;
  double estimated_cost = 0.0;
};

/// E(phi_{i1} ... phi_{ik}) for an arbitrary tuple of factor indices.
cd factor_product_expectation(const SpinSystem& system, std::span<const std::size_t> tuple);

/// E f^s by multiset expansion with multinomial weights.
cd power_moment(const SpinSystem& system, std::size_t s);

MomentSequence moment_sequence(const MomentRequest& request);

double multiset_route_cost(const SpinSystem& system, std::size_t max_order);
double enumeration_route_cost(const SpinSystem& system, std::size_t max_order);

/// sum_{s=1..N} C(m+s-1, s) * states^{min(s r, n)}.
double multiset_cost_estimate(std::size_t m, double states, std::size_t r, std::size_t n,
                              std::size_t max_order);

/// Multiset evaluator with a cache of connected-component expectations.
/// Safe to share between threads.
class MomentEngine {
 public:
  /// Expectation of the product over a connected, sorted multiset.
  using ComponentFn = std::function<cd(const std::vector<std::size_t>&)>;

  explicit MomentEngine(const SpinSystem& system);
  MomentEngine(std::vector<std::vector<std::size_t>> scopes, ComponentFn component);

  /// E of the product over a multiset, given as a non-decreasing index list.
  cd multiset_expectation(std::span<const std::size_t> sorted_tuple);
  cd power_moment(std::size_t s);

 private:
  cd component_expectation(const std::vector<std::size_t>& sorted_tuple);

  std::vector<std::vector<std::size_t>> scopes_;
  ComponentFn component_;
  std::mutex mutex_;
  std::map<std::vector<std::size_t>, cd> cache_;
};

}  // namespace multispin
