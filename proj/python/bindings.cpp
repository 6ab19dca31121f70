#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "multispin/builders.hpp"
#include "multispin/errors.hpp"
#include "multispin/exact.hpp"
#include "multispin/interpolate.hpp"
#include "multispin/io.hpp"
#include "multispin/moments.hpp"
#include "multispin/parallel.hpp"

namespace py = pybind11;
using namespace multispin;

namespace {

py::dict approx_dict(const ApproxReport& r) {
  py::dict plan;
  plan["N"] = r.plan.N;
  plan["k"] = r.plan.k;
  plan["rho"] = r.plan.rho;
  plan["beta"] = r.plan.beta;
  plan["radius"] = r.plan.radius;
  plan["log_lower_beta"] = r.plan.log_lower_beta;
  plan["epsilon_guarantee"] = r.plan.epsilon_guarantee;
  py::dict out;
  out["value"] = r.value;
  out["log_value"] = r.log_value;
  out["epsilon_guarantee"] = r.epsilon_guarantee;
  out["gamma"] = r.shift.gamma;
  out["moment_method"] = std::string(to_string(r.moment_method));
  out["plan"] = plan;
  return out;
}

}  // namespace

PYBIND11_MODULE(_multispin, m) {
  m.doc() = "Partition functions E exp(lambda f) of multi-spin systems";

  auto base = py::register_exception<Error>(m, "MultispinError");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<InadmissibleError>(m, "InadmissibleError", base.ptr());
  py::register_exception<BudgetError>(m, "BudgetError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<SpinSystem>(m, "SpinSystem")
      .def_static("from_json", [](const std::string& text) { return spin_system_from_json(parse_json_text(text)); })
      .def("to_json", [](const SpinSystem& s) { return spin_system_to_json(s).dump(); })
      .def_property_readonly("n", &SpinSystem::num_coordinates)
      .def_property_readonly("m", &SpinSystem::num_factors)
      .def_property_readonly("r", &SpinSystem::arity)
      .def_property_readonly("c", &SpinSystem::multiplicity);

  m.def("set_thread_count", &set_thread_count, py::arg("count"));
  m.def("zero_free_radius", &zero_free_radius, py::arg("r"), py::arg("c"), py::arg("delta") = 0.0);
  m.def("validate", [](const SpinSystem& s) {
    const auto r = validate_system(s);
    py::dict out;
    out["admissible"] = r.admissible();
    out["structure_ok"] = r.structure_ok;
    out["lipschitz_ok"] = r.lipschitz_ok;
    out["worst_violation"] = r.worst_violation;
    out["r"] = r.r;
    out["c"] = r.c;
    return out;
  });
  m.def("approximate",
        [](const SpinSystem& s, cd lambda, double epsilon, double delta, const std::string& method) {
          ApproxOptions options;
          options.moments.method = moment_method_from_string(method);
          ApproxReport r;
          {
            py::gil_scoped_release release;
            r = approximate_partition(s, lambda, epsilon, delta, options);
          }
          return approx_dict(r);
        },
        py::arg("system"), py::arg("lam"), py::arg("epsilon") = 1e-3, py::arg("delta") = 0.1,
        py::arg("method") = "automatic");
  m.def("exact", [](const SpinSystem& s, cd lambda) { return exact_partition(s, lambda); },
        py::arg("system"), py::arg("lam"), py::call_guard<py::gil_scoped_release>());
  m.def("moments",
        [](const SpinSystem& s, std::size_t order, const std::string& method) {
          MomentOptions options;
          options.method = moment_method_from_string(method);
          return moment_sequence({s, order, options}).values;
        },
        py::arg("system"), py::arg("order"), py::arg("method") = "automatic");
  m.def("scan_zeros",
        [](const SpinSystem& s, double radius, std::size_t grid) {
          const auto r = scan_zeros(s, radius, grid);
          std::vector<cd> zeros;
          for (const auto& z : r.zeros) zeros.push_back(z.z);
          py::dict out;
          out["zeros"] = zeros;
          out["consistent"] = r.consistent;
          out["grid_min"] = r.grid_min;
          return out;
        },
        py::arg("system"), py::arg("radius"), py::arg("grid") = 32);
  m.def("build_ising",
        [](std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
           const std::vector<double>& field) {
          IsingGraph g{n, {}, field};
          for (const auto& [u, v, w] : edges) g.edges.push_back({u, v, w});
          return build_ising(g);
        },
        py::arg("num_vertices"), py::arg("edges"), py::arg("field") = std::vector<double>{});
  m.def("build_matching_tilt",
        [](std::size_t n, const std::vector<std::vector<std::size_t>>& edges, double mu,
           const std::vector<double>& probs) {
          const auto t = build_matching_tilt({n, edges}, mu, probs);
          return py::make_tuple(t.system, t.lambda, t.admissible);
        },
        py::arg("num_vertices"), py::arg("edges"), py::arg("mu"), py::arg("edge_prob") = std::vector<double>{});
}
