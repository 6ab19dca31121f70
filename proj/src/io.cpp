#include "multispin/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "multispin/errors.hpp"

namespace multispin {

namespace {

template <class F>
auto guarded(const char* what, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key))
    throw ParseError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

std::size_t index_value(const Json& v) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw ParseError("expected a non-negative integer");
  const auto i = v.get<long long>();
  if (i < 0) throw ParseError("expected a non-negative integer");
  return static_cast<std::size_t>(i);
}

std::vector<std::size_t> index_list(const Json& v) {
  if (!v.is_array()) throw ParseError("expected an array of indices");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(index_value(e));
  return out;
}

double number(const Json& v) {
  if (!v.is_number()) throw ParseError("expected a number");
  return v.get<double>();
}

}  // namespace

Json parse_json_text(const std::string& text) {
  return guarded("invalid JSON", [&] { return Json::parse(text); });
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str());
}

Json complex_to_json(cd value) {
  Json out;
  out["re"] = value.real();
  out["im"] = value.imag();
  return out;
}

cd complex_from_json(const Json& value) {
  if (value.is_number()) return {value.get<double>(), 0.0};
  if (value.is_array() && value.size() == 2) return {number(value[0]), number(value[1])};
  if (value.is_object()) return {number(require(value, "re")), number(require(value, "im"))};
  throw ParseError("expected a complex number as [re, im], {re, im} or a real");
}

SpinSystem spin_system_from_json(const Json& doc) {
  return guarded("invalid spin model", [&] {
    SpinSystem system;
    const auto& spaces = require(doc, "spaces");
    if (!spaces.is_array()) throw ParseError("'spaces' must be an array");
    for (const auto& s : spaces) {
      Space space;
      space.size = index_value(require(s, "size"));
      if (s.contains("probs")) {
        for (const auto& p : s.at("probs")) space.probs.push_back(number(p));
      } else {
        space = Space::uniform(space.size);
      }
      system.spaces.push_back(std::move(space));
    }
    const auto& factors = require(doc, "factors");
    if (!factors.is_array()) throw ParseError("'factors' must be an array");
    for (const auto& f : factors) {
      Factor factor;
      factor.scope = index_list(require(f, "scope"));
      const auto& table = require(f, "table");
      if (!table.is_array()) throw ParseError("'table' must be an array");
      for (const auto& entry : table) factor.table.push_back(complex_from_json(entry));
      system.factors.push_back(std::move(factor));
    }
    return system;
  });
}

Json spin_system_to_json(const SpinSystem& system) {
  Json doc;
  doc["spaces"] = Json::array();
  for (const auto& s : system.spaces) {
    Json space;
    space["size"] = s.size;
    space["probs"] = s.probs;
    doc["spaces"].push_back(std::move(space));
  }
  doc["factors"] = Json::array();
  for (const auto& f : system.factors) {
    Json factor;
    factor["scope"] = f.scope;
    factor["table"] = Json::array();
    for (const auto& v : f.table) factor["table"].push_back(Json::array({v.real(), v.imag()}));
    doc["factors"].push_back(std::move(factor));
  }
  return doc;
}

GaussianModel gaussian_model_from_json(const Json& doc) {
  return guarded("invalid Gaussian model", [&] {
    GaussianModel model;
    model.n = index_value(require(doc, "n"));
    const auto& factors = require(doc, "factors");
    if (!factors.is_array()) throw ParseError("'factors' must be an array");
    for (const auto& f : factors) {
      const auto& kind = require(f, "kind");
      if (!kind.is_string()) throw ParseError("'kind' must be a string");
      GaussianFactor factor;
      factor.kind = gaussian_kind_from_string(kind.get<std::string>());
      factor.scope = index_list(require(f, "scope"));
      for (const auto& p : require(f, "params")) factor.params.push_back(number(p));
      model.factors.push_back(std::move(factor));
    }
    return model;
  });
}

Json gaussian_model_to_json(const GaussianModel& model) {
  Json doc;
  doc["n"] = model.n;
  doc["factors"] = Json::array();
  for (const auto& f : model.factors) {
    Json factor;
    factor["kind"] = to_string(f.kind);
    factor["scope"] = f.scope;
    factor["params"] = f.params;
    doc["factors"].push_back(std::move(factor));
  }
  return doc;
}

Hypergraph hypergraph_from_json(const Json& doc) {
  return guarded("invalid hypergraph", [&] {
    Hypergraph graph;
    graph.num_vertices = index_value(require(doc, "num_vertices"));
    for (const auto& e : require(doc, "edges")) graph.edges.push_back(index_list(e));
    return graph;
  });
}

IsingGraph ising_graph_from_json(const Json& doc) {
  return guarded("invalid Ising graph", [&] {
    IsingGraph graph;
    graph.num_vertices = index_value(require(doc, "num_vertices"));
    for (const auto& e : require(doc, "edges")) {
      if (!e.is_array() || e.size() != 3) throw ParseError("Ising edges are [u, v, weight]");
      graph.edges.push_back({index_value(e[0]), index_value(e[1]), number(e[2])});
    }
    if (doc.contains("field"))
      for (const auto& h : doc.at("field")) graph.field.push_back(number(h));
    return graph;
  });
}

Json validation_to_json(const ValidationReport& report) {
  Json out;
  out["admissible"] = report.admissible();
  out["structure_ok"] = report.structure_ok;
  out["lipschitz_ok"] = report.lipschitz_ok;
  out["n"] = report.n;
  out["m"] = report.m;
  out["q"] = report.q;
  out["r"] = report.r;
  out["c"] = report.c;
  out["worst_violation"] = report.worst_violation;
  out["structural_errors"] = report.structural_errors;
  out["violations"] = Json::array();
  for (const auto& v : report.violations)
    out["violations"].push_back({{"factor", v.factor}, {"coordinate", v.coordinate}, {"magnitude", v.magnitude}});
  return out;
}

Json plan_to_json(const ApproxPlan& plan) {
  Json out;
  out["lambda"] = complex_to_json(plan.lambda);
  out["epsilon"] = plan.epsilon;
  out["delta"] = plan.delta;
  out["beta"] = plan.beta;
  out["radius"] = plan.radius;
  out["rho"] = plan.rho;
  out["N"] = plan.N;
  out["k"] = plan.k;
  out["moment_order"] = plan.moment_order;
  out["log_lower_beta"] = plan.log_lower_beta;
  out["interpolation_bound"] = plan.interpolation_bound;
  out["truncation_bound"] = plan.truncation_bound;
  out["epsilon_guarantee"] = plan.epsilon_guarantee;
  return out;
}

Json approx_report_to_json(const ApproxReport& report, bool timings) {
  Json out;
  out["value"] = complex_to_json(report.value);
  out["log_value"] = complex_to_json(report.log_value);
  out["epsilon_guarantee"] = report.epsilon_guarantee;
  out["plan"] = plan_to_json(report.plan);
  out["shift"] = {{"anchor", report.shift.anchor}, {"gamma", complex_to_json(report.shift.gamma)}};
  out["moment_method"] = to_string(report.moment_method);
  if (timings)
    out["runtime_ms"] = {{"moments", report.timings.moments_ms}, {"total", report.timings.total_ms}};
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

std::string dump_report(const Json& doc) { return doc.dump(2); }

}  // namespace multispin
