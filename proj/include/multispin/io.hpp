#pragma once

// JSON documents for models and reports.

#include <complex>
#include <string>

#include <json.hpp>

#include "multispin/builders.hpp"
#include "multispin/gaussian.hpp"
#include "multispin/interpolate.hpp"
#include "multispin/spin_system.hpp"

namespace multispin {

using Json = nlohmann::ordered_json;

/// Reads a whole file and parses it; throws ParseError on I/O or syntax errors.
Json read_json_file(const std::string& path);
Json parse_json_text(const std::string& text);

/// {re, im}
Json complex_to_json(cd value);
cd complex_from_json(const Json& value);

/// {spaces: [{size, probs}], factors: [{scope, table: [[re, im], ...]}]}
SpinSystem spin_system_from_json(const Json& doc);
Json spin_system_to_json(const SpinSystem& system);

/// {n, factors: [{kind, scope, params}]}
GaussianModel gaussian_model_from_json(const Json& doc);
Json gaussian_model_to_json(const GaussianModel& model);

/// {num_vertices, edges: [[v, ...], ...]}
Hypergraph hypergraph_from_json(const Json& doc);
/// {num_vertices, edges: [[u, v, weight], ...], field: [h, ...]}
IsingGraph ising_graph_from_json(const Json& doc);

Json validation_to_json(const ValidationReport& report);
Json plan_to_json(const ApproxPlan& plan);
Json approx_report_to_json(const ApproxReport& report, bool timings);

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);
/// Serializes with full-precision numbers and two-space indentation.
std::string dump_report(const Json& doc);

}  // namespace multispin
