#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "multispin/cli.hpp"
#include "multispin/io.hpp"
#include "multispin/spin_system.hpp"
#include "test_support.hpp"

using namespace multispin;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
  Json report() const { return Json::parse(out); }
  // Report without the echoed command line.
  std::string body() const {
    auto doc = report();
    doc.erase("command");
    return doc.dump(2);
  }
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "multispin_cli_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path.string();
}

const char* kHalfProduct = R"({"spaces": [{"size": 2}, {"size": 2}],
  "factors": [{"scope": [0, 1], "table": [0.5, -0.5, -0.5, 0.5]}]})";

}  // namespace

TEST_CASE("validate, bound and exact") {
  const auto path = write_temp("half.json", kHalfProduct);
  auto v = invoke({"validate", path});
  CHECK(v.code == kExitOk);
  CHECK(v.report()["command"].get<std::string>().rfind("validate", 0) == 0);
  CHECK(v.report()["exit_code"] == 0);

  auto b = invoke({"bound", path});
  REQUIRE(b.code == kExitOk);
  const auto rb = b.report();
  CHECK(rb["radius"].get<double>() == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(rb["radius_delta0"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  auto e = invoke({"exact", path, "--lambda-re", "0.2"});
  REQUIRE(e.code == kExitOk);
  const auto re = e.report();
  CHECK(std::abs(re["value"]["re"].get<double>() - std::cosh(0.1)) < 1e-15);
}

TEST_CASE("approx report round-trips") {
  const auto path = write_temp("half.json", kHalfProduct);
  auto a = invoke({"approx", path, "--lambda-re", "0.2", "--epsilon", "1e-6"});
  REQUIRE(a.code == kExitOk);
  const auto report = a.report();
  const double log_re = report["log_value"]["re"].get<double>();
  CHECK(std::abs(log_re - std::log(std::cosh(0.1))) <= 1e-6);
  CHECK(report["epsilon_guarantee"].get<double>() <= 1e-6);
  CHECK_FALSE(report.contains("runtime_ms"));
  const auto reparsed = Json::parse(report.dump());
  CHECK(std::abs(reparsed["log_value"]["re"].get<double>() - log_re) <= 1e-15 * std::abs(log_re));

  auto timed = invoke({"--timings", "approx", path, "--lambda-re", "0.2"});
  CHECK(timed.report().contains("runtime_ms"));
}

TEST_CASE("bound radius matches the library") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = testing_support::random_system(rng, {});
    const auto path = write_temp("random.json", dump_report(spin_system_to_json(s)));
    auto b = invoke({"bound", path, "--delta", "0.2"});
    REQUIRE(b.code == kExitOk);
    CHECK(b.report()["radius"].get<double>() ==
          doctest::Approx(zero_free_radius(s.arity(), s.multiplicity(), 0.2)).epsilon(1e-15));
  }
}

TEST_CASE("exit codes") {
  const auto good = write_temp("half.json", kHalfProduct);
  const auto steep = write_temp("steep.json", R"({"spaces": [{"size": 2}, {"size": 2}],
    "factors": [{"scope": [0, 1], "table": [3, 0, 0, 3]}]})");
  const auto broken = write_temp("broken.json", "{\"spaces\": [");
  CHECK(invoke({"validate", steep}).code == kExitValidation);
  CHECK(invoke({"approx", good, "--lambda-re", "5"}).code == kExitInadmissible);
  CHECK(invoke({"approx", good, "--lambda-re", "0.1", "--cost-ceiling", "1"}).code == kExitBudget);
  const auto parse = invoke({"validate", broken});
  CHECK(parse.code == kExitParse);
  CHECK(parse.report()["error"].is_string());
  CHECK_FALSE(parse.err.empty());
  CHECK(invoke({"frobnicate"}).code == kExitParse);
  CHECK(invoke({"validate", "/nonexistent/model.json"}).code == kExitParse);
}

TEST_CASE("output is deterministic across thread counts") {
  std::mt19937_64 rng(77);
  testing_support::SystemShape shape;
  shape.max_n = 10;
  auto s = testing_support::random_system(rng, shape);
  const auto path = write_temp("det.json", dump_report(spin_system_to_json(s)));
  const double radius = zero_free_radius(s.arity(), s.multiplicity(), 0.1);
  const std::string lambda = format_double(0.5 * radius);
  const auto one = invoke({"--threads", "1", "approx", path, "--lambda-re", lambda, "--epsilon", "1e-4"});
  const auto again = invoke({"--threads", "1", "approx", path, "--lambda-re", lambda, "--epsilon", "1e-4"});
  const auto four = invoke({"--threads", "4", "approx", path, "--lambda-re", lambda, "--epsilon", "1e-4"});
  REQUIRE(one.code == kExitOk);
  CHECK(one.out == again.out);
  CHECK(one.body() == four.body());
  const auto m1 = invoke({"--threads", "1", "moments", path, "--order", "6"});
  const auto m3 = invoke({"--threads", "3", "moments", path, "--order", "6"});
  CHECK(m1.body() == m3.body());
}

TEST_CASE("builders and gauss through the command line") {
  const auto graph = write_temp("c4.json", R"({"num_vertices": 4, "edges": [[0, 1], [1, 2], [2, 3], [3, 0]]})");
  auto m = invoke({"build", "matching", graph, "--mu", "0.1"});
  REQUIRE(m.code == kExitOk);
  const auto built = write_temp("c4_model.json", m.out);
  CHECK(invoke({"validate", built}).code == kExitOk);

  auto absint = invoke({"build", "absint", "--n", "1"});
  REQUIRE(absint.code == kExitOk);
  const auto model = write_temp("absint.json", absint.out);
  CHECK(invoke({"gauss", "validate", model}).code == kExitOk);
  auto g = invoke({"gauss", "approx", model, "--lambda-re", "0.05", "--epsilon", "1e-4"});
  REQUIRE(g.code == kExitOk);
  auto ex = invoke({"gauss", "exact", model, "--lambda-re", "0.05"});
  REQUIRE(ex.code == kExitOk);
  const double approx_log = g.report()["log_value"]["re"].get<double>();
  const double exact_log = ex.report()["log_value"]["re"].get<double>();
  CHECK(std::abs(approx_log - exact_log) <= 1e-4 + g.report()["quadrature_residual"].get<double>() + 1e-8);
}
