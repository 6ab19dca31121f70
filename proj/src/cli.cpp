#include "multispin/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "multispin/builders.hpp"
#include "multispin/errors.hpp"
#include "multispin/exact.hpp"
#include "multispin/gaussian.hpp"
#include "multispin/interpolate.hpp"
#include "multispin/io.hpp"
#include "multispin/moments.hpp"
#include "multispin/parallel.hpp"

namespace multispin {

namespace {

struct Settings {
  unsigned threads = 0;
  bool timings = false;
  std::string model;
  double lambda_re = 0.0, lambda_im = 0.0;
  double epsilon = 1e-3;
  double delta = 0.1;
  std::string method = "automatic";
  double cost_ceiling = 1e9;
  std::size_t order = 4;
  double radius = 0.0;
  std::size_t grid = 32;
  std::size_t nodes = 32;
  double truncation_L = 0.0;
  double mu = 0.0;
  std::vector<double> probs;
  std::string penalty = "linear";
  std::size_t particles = 2, dim = 1, count = 1;
  std::vector<std::size_t> ns{64, 256, 1024};
  double grid_bound = 4.0;
};

Json load_document(const std::string& path) {
  Json doc = read_json_file(path);
  // Accept the output of `build` directly.
  if (doc.is_object() && doc.contains("model") && doc.at("model").is_object()) return doc.at("model");
  return doc;
}

cd lambda_of(const Settings& s) { return {s.lambda_re, s.lambda_im}; }

MomentOptions moment_options(const Settings& s) {
  MomentOptions o;
  o.method = moment_method_from_string(s.method);
  o.cost_ceiling = s.cost_ceiling;
  return o;
}

Json log_value_of(cd value) {
  if (value == cd{0.0, 0.0}) return nullptr;
  return complex_to_json(std::log(value));
}

Json cmd_validate(const Settings& s, int& code) {
  const auto system = spin_system_from_json(load_document(s.model));
  const auto report = validate_system(system);
  if (!report.admissible()) code = kExitValidation;
  return {{"validation", validation_to_json(report)}};
}

Json cmd_bound(const Settings& s) {
  const auto system = spin_system_from_json(load_document(s.model));
  require_admissible(system);
  const auto shifted = shift_factors(system, default_anchor(system));
  const std::size_t r = system.arity(), c = system.multiplicity();
  const double radius = zero_free_radius(r, c, s.delta);
  const auto bounds = magnitude_bounds(shifted.system, radius);
  return {{"n", system.num_coordinates()},
          {"m", system.num_factors()},
          {"r", r},
          {"c", c},
          {"delta", s.delta},
          {"radius", radius},
          {"radius_delta0", zero_free_radius(r, c, 0.0)},
          {"sup_bound", bounds.sup_bound},
          {"log_upper", bounds.log_upper},
          {"log_lower", bounds.log_lower},
          {"shift", {{"anchor", shifted.shift.anchor}, {"gamma", complex_to_json(shifted.shift.gamma)}}}};
}

Json cmd_approx(const Settings& s) {
  const auto system = spin_system_from_json(load_document(s.model));
  ApproxOptions options;
  options.moments = moment_options(s);
  const auto report = approximate_partition(system, lambda_of(s), s.epsilon, s.delta, options);
  return approx_report_to_json(report, s.timings);
}

Json cmd_exact(const Settings& s) {
  const auto system = spin_system_from_json(load_document(s.model));
  const cd value = exact_partition(system, lambda_of(s));
  return {{"lambda", complex_to_json(lambda_of(s))},
          {"value", complex_to_json(value)},
          {"log_value", log_value_of(value)}};
}

Json cmd_moments(const Settings& s) {
  const auto system = spin_system_from_json(load_document(s.model));
  require_admissible(system);
  const auto seq = moment_sequence({system, s.order, moment_options(s)});
  Json values = Json::array();
  for (const auto& v : seq.values) values.push_back(complex_to_json(v));
  return {{"order", s.order},
          {"method", to_string(seq.method)},
          {"estimated_cost", seq.estimated_cost},
          {"moments", values}};
}

Json zero_report_to_json(const ZeroScanReport& scan) {
  Json zeros = Json::array();
  for (const auto& z : scan.zeros)
    zeros.push_back({{"z", complex_to_json(z.z)}, {"modulus", std::abs(z.z)}, {"residual", z.residual}});
  Json winding = Json::array();
  for (const auto& w : scan.winding_evidence)
    winding.push_back({{"circle_radius", w.circle_radius}, {"winding", w.winding}, {"roots_inside", w.roots_inside}});
  Json out = {{"disc_radius", scan.disc_radius},
              {"grid_min", scan.grid_min},
              {"grid_max", scan.grid_max},
              {"zeros", zeros},
              {"zero_free", scan.zeros.empty() && scan.consistent &&
                                std::all_of(scan.winding_evidence.begin(), scan.winding_evidence.end(),
                                            [](const WindingEvidence& w) { return w.winding == 0; })},
              {"winding_evidence", winding},
              {"newton_seeds", scan.newton_seeds},
              {"newton_failures", scan.newton_failures},
              {"consistent", scan.consistent}};
  out["min_modulus_zero"] = scan.min_modulus_zero ? complex_to_json(*scan.min_modulus_zero) : Json(nullptr);
  return out;
}

Json cmd_zeros(const Settings& s) {
  const auto system = spin_system_from_json(load_document(s.model));
  const double radius = s.radius > 0.0 ? s.radius
                                       : zero_free_radius(system.arity(), system.multiplicity(), 0.0);
  return zero_report_to_json(scan_zeros(system, radius, s.grid));
}

Json cmd_gauss(const std::string& sub, const Settings& s, int& code) {
  const auto model = gaussian_model_from_json(load_document(s.model));
  if (sub == "validate") {
    const auto v = validate_gaussian_model(model);
    if (!v.ok) code = kExitValidation;
    return {{"validation",
             {{"admissible", v.ok},
              {"n", model.n},
              {"m", model.num_factors()},
              {"r", model.arity()},
              {"c", model.multiplicity()},
              {"worst_lipschitz", v.worst_lipschitz},
              {"errors", v.errors}}}};
  }
  if (sub == "approx") {
    GaussianApproxOptions options;
    options.nodes_per_axis = s.nodes;
    options.truncation_L = s.truncation_L;
    options.moments = moment_options(s);
    const auto r = approximate_gaussian_partition(model, lambda_of(s), s.epsilon, s.delta, options);
    Json out = approx_report_to_json(r.report, s.timings);
    out["truncation_L"] = r.truncation_L;
    out["truncation_auto"] = r.truncation_auto;
    out["nodes_per_axis"] = r.nodes_per_axis;
    out["quadrature_residual"] = r.quadrature_residual;
    out["refined_log_value"] = complex_to_json(r.refined_log_value);
    return out;
  }
  if (sub == "exact") {
    const auto r = exact_gaussian_partition(model, lambda_of(s), s.nodes);
    return {{"lambda", complex_to_json(lambda_of(s))},
            {"value", complex_to_json(r.value)},
            {"log_value", log_value_of(r.value)},
            {"previous", complex_to_json(r.previous)},
            {"nodes_per_axis", r.nodes_per_axis},
            {"converged", r.converged}};
  }
  if (sub == "disc") {
    const auto r = scan_gaussian_disc(model, s.grid, s.nodes);
    return {{"radius", r.radius},
            {"min_modulus", r.min_modulus},
            {"log_lower", r.log_lower},
            {"truncation_L", r.truncation_L},
            {"quadrature_residual", r.quadrature_residual},
            {"zero_free", r.zero_free}};
  }
  throw DomainError("unknown gauss subcommand '" + sub + "'");
}

Json cmd_build(const std::string& kind, const Settings& s) {
  if (kind == "ising") {
    const auto system = build_ising(ising_graph_from_json(read_json_file(s.model)));
    return {{"model", spin_system_to_json(system)},
            {"r", system.arity()},
            {"c", system.multiplicity()}};
  }
  if (kind == "matching") {
    const auto penalty = s.penalty == "indicator" ? MatchingPenalty::indicator : MatchingPenalty::linear;
    if (s.penalty != "indicator" && s.penalty != "linear")
      throw DomainError("penalty must be linear or indicator");
    const auto tilt = build_matching_tilt(hypergraph_from_json(read_json_file(s.model)), s.mu, s.probs, penalty);
    return {{"model", spin_system_to_json(tilt.system)},
            {"lambda", tilt.lambda},
            {"radius", tilt.radius},
            {"admissible", tilt.admissible},
            {"r", tilt.system.arity()},
            {"c", tilt.system.multiplicity()}};
  }
  if (kind == "particles") {
    const auto p = build_particles(s.particles, s.dim);
    return {{"model", gaussian_model_to_json(p.model)},
            {"r", p.model.arity()},
            {"c", p.incidence_c},
            {"stated_c", p.stated_c}};
  }
  if (kind == "absint") {
    const auto model = build_abs_integrand(s.count);
    return {{"model", gaussian_model_to_json(model)}, {"r", model.arity()}, {"c", model.multiplicity()}};
  }
  throw DomainError("unknown builder '" + kind + "'");
}

Json cmd_optimality(const Settings& s) {
  auto config = calibrate_truncation(solve_psi_equation(s.grid_bound));
  const auto rows = optimality_experiment(config, s.ns, s.grid);
  Json table = Json::array();
  for (const auto& row : rows) {
    Json r = {{"n", row.n},
              {"found", row.found},
              {"min_zero_modulus", row.found ? Json(row.min_zero_modulus) : Json(nullptr)},
              {"scaled_modulus", row.found ? Json(row.min_zero_modulus * std::sqrt(static_cast<double>(row.n)))
                                           : Json(nullptr)},
              {"envelope", row.envelope},
              {"consistent", row.consistent}};
    r["min_zero"] = row.min_zero ? complex_to_json(*row.min_zero) : Json(nullptr);
    table.push_back(std::move(r));
  }
  return {{"config",
           {{"u", complex_to_json(config.u)},
            {"v", complex_to_json(config.v)},
            {"tau", config.tau},
            {"L", config.L},
            {"rho", config.rho},
            {"residual", config.residual},
            {"gaussian_zero", config.gaussian_zero ? complex_to_json(*config.gaussian_zero) : Json(nullptr)}}},
          {"rows", table}};
}

const char* error_kind(int code) {
  switch (code) {
    case kExitValidation: return "validation";
    case kExitInadmissible: return "inadmissible";
    case kExitBudget: return "budget";
    case kExitParse: return "parse";
    default: return "failure";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Partition functions of multi-spin systems"};
  app.require_subcommand(1);
  app.add_option("--threads", s.threads, "Worker threads (0 = available parallelism)");
  app.add_flag("--timings", s.timings, "Include runtime_ms in reports");

  auto model_arg = [&](CLI::App* cmd, const char* what) { cmd->add_option("model", s.model, what)->required(); };
  auto lambda_args = [&](CLI::App* cmd) {
    cmd->add_option("--lambda-re", s.lambda_re, "Real part of lambda");
    cmd->add_option("--lambda-im", s.lambda_im, "Imaginary part of lambda");
  };
  auto method_args = [&](CLI::App* cmd) {
    cmd->add_option("--method", s.method, "Moment route: automatic, multiset, enumeration");
    cmd->add_option("--cost-ceiling", s.cost_ceiling, "Moment cost ceiling");
  };

  auto* validate = app.add_subcommand("validate", "Check structure and Lipschitz condition");
  model_arg(validate, "Model file");
  auto* bound = app.add_subcommand("bound", "Zero-free radius and magnitude bounds");
  model_arg(bound, "Model file");
  bound->add_option("--delta", s.delta, "Slack delta in [0, 1)");
  auto* approx = app.add_subcommand("approx", "Interpolation approximation of E e^{lambda f}");
  model_arg(approx, "Model file");
  lambda_args(approx);
  method_args(approx);
  approx->add_option("--epsilon", s.epsilon, "Target error on the logarithm");
  approx->add_option("--delta", s.delta, "Slack delta in (0, 1)");
  auto* exact = app.add_subcommand("exact", "Full enumeration of E e^{lambda f}");
  model_arg(exact, "Model file");
  lambda_args(exact);
  auto* moments = app.add_subcommand("moments", "Power moments E f^s");
  model_arg(moments, "Model file");
  moments->add_option("--order", s.order, "Highest order");
  method_args(moments);
  auto* zeros = app.add_subcommand("zeros", "Scan a disc for zeros of E e^{z f}");
  model_arg(zeros, "Model file");
  zeros->add_option("--radius", s.radius, "Disc radius (default: zero-free radius)");
  zeros->add_option("--grid", s.grid, "Grid points per axis");

  auto* gauss = app.add_subcommand("gauss", "Gaussian models");
  std::string gauss_sub;
  gauss->add_option("sub", gauss_sub, "validate, approx, exact or disc")->required();
  model_arg(gauss, "Gaussian model file");
  lambda_args(gauss);
  method_args(gauss);
  gauss->add_option("--epsilon", s.epsilon, "Target error on the logarithm");
  gauss->add_option("--delta", s.delta, "Slack delta in (0, 1)");
  gauss->add_option("--nodes", s.nodes, "Quadrature nodes per axis");
  gauss->add_option("--L", s.truncation_L, "Truncation level (default: automatic)");
  gauss->add_option("--grid", s.grid, "Grid points per axis for disc");

  auto* build = app.add_subcommand("build", "Construct application models");
  std::string build_kind;
  build->add_option("kind", build_kind, "ising, matching, particles or absint")->required();
  build->add_option("input", s.model, "Graph file for ising and matching");
  build->add_option("--mu", s.mu, "Tilt strength for matching");
  build->add_option("--prob", s.probs, "Per-edge selection probabilities")->delimiter(',');
  build->add_option("--penalty", s.penalty, "linear or indicator");
  build->add_option("--N", s.particles, "Particle count");
  build->add_option("--d", s.dim, "Particle dimension");
  build->add_option("--n", s.count, "Coordinate count for absint");

  auto* optimality = app.add_subcommand("optimality", "Zeros of the cube family versus n");
  optimality->add_option("--n", s.ns, "Values of n")->delimiter(',');
  optimality->add_option("--grid-bound", s.grid_bound, "Search box for the psi equation");
  optimality->add_option("--grid", s.grid, "Zero-scan grid points per axis");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  set_thread_count(s.threads);
  std::string command;
  for (const auto& a : args) command += (command.empty() ? "" : " ") + a;
  Json report;
  report["command"] = command;
  int code = kExitOk;
  try {
    Json body;
    if (*validate) body = cmd_validate(s, code);
    else if (*bound) body = cmd_bound(s);
    else if (*approx) body = cmd_approx(s);
    else if (*exact) body = cmd_exact(s);
    else if (*moments) body = cmd_moments(s);
    else if (*zeros) body = cmd_zeros(s);
    else if (*gauss) body = cmd_gauss(gauss_sub, s, code);
    else if (*build) body = cmd_build(build_kind, s);
    else body = cmd_optimality(s);
    for (auto& [key, value] : body.items()) report[key] = value;
  } catch (const ValidationError& e) {
    code = kExitValidation;
    report["error"] = e.what();
  } catch (const InadmissibleError& e) {
    code = kExitInadmissible;
    report["error"] = e.what();
  } catch (const BudgetError& e) {
    code = kExitBudget;
    report["error"] = e.what();
  } catch (const ParseError& e) {
    code = kExitParse;
    report["error"] = e.what();
  } catch (const std::exception& e) {
    code = kExitFailure;
    report["error"] = e.what();
  }
  if (code != kExitOk && report.contains("error"))
    err << "error (" << error_kind(code) << "): " << report["error"].get<std::string>() << "\n";
  report["exit_code"] = code;
  out << dump_report(report) << "\n";
  return code;
}

}  // namespace multispin
