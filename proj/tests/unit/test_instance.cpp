#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "sysrisk/instance.hpp"
#include "sysrisk/report.hpp"

using namespace sysrisk;

namespace {

const std::string kMinimal = R"({
  "probabilities": [1.0],
  "positions": [[2.0]],
  "aggregation": {"kind": "sum"},
  "acceptance": {"kind": "nonnegative"}
})";

std::string worked_with(const std::string& probabilities, const std::string& positions) {
  return R"({"probabilities": )" + probabilities + R"(, "positions": )" + positions +
         R"(, "aggregation": {"kind": "sum"}, "acceptance": {"kind": "nonnegative"}})";
}

std::filesystem::path corpus(const char* name) { return std::filesystem::path(SYSRISK_CORPUS_DIR) / name; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SYSRISK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("a minimal instance parses with defaults") {
  const Instance inst = parse_instance(kMinimal);
  CHECK(inst.space.size() == 1);
  CHECK(inst.X.rows() == 1);
  CHECK(inst.mode == DualMode::rho);
  CHECK(inst.solver.tol == 1e-6);
  CHECK(inst.solver.max_iter == 10000);
  CHECK(inst.solver.seed == 0);
  const RunResult r = run_solve(inst);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.report["primal"]["value"].get<double>() == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("invalid instances are rejected") {
  CHECK_THROWS_AS(parse_instance(worked_with("[0.5, 0.4]", "[[1, -2], [0, 1]]")), ValidationError);
  CHECK_THROWS_AS(parse_instance(worked_with("[0.5, 0.5]", "[[1, -2, 3], [0, 1]]")), DimensionError);
  CHECK_THROWS_AS(parse_instance(R"({"probabilities": [0.5, 0.5], "positions": [[1, -2], [0, 1]],
    "institutions": 3, "aggregation": {"kind": "sum"}, "acceptance": {"kind": "nonnegative"}})"),
                  DimensionError);
  CHECK_THROWS_AS(parse_instance(R"({"probabilities": [1], "positions": [[1]], "mode": "rho"})"), ValidationError);
  CHECK_THROWS_AS(parse_instance(R"({"probabilities": [1], "positions": [[1]],
    "aggregation": {"kind": "sum"}, "acceptance": {"kind": "expected_shortfall", "level": 1.5}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_instance(R"({"probabilities": [1], "positions": [[1]], "mode": "shortfall",
    "shortfall": {"utility": {"kind": "exponential", "gamma": 1}, "u0": 2}})"),
                  ValidationError);
}

TEST_CASE("malformed JSON reports line and column") {
  try {
    parse_instance("{\n  \"probabilities\": [1.0,\n  ]\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
}

TEST_CASE("serialization round trips and hashes are stable") {
  for (const char* name : {"worked_sum_nonnegative.json", "zero_position.json", "es_sum_of_losses_tilde.json",
                           "shortfall_exponential.json"}) {
    INFO(name);
    const Instance inst = load_instance(corpus(name));
    const nlohmann::json j = instance_to_json(inst);
    const Instance again = instance_from_json(j);
    CHECK(instance_to_json(again) == j);
    CHECK(instance_hash(again) == instance_hash(inst));
  }
  const Instance a = parse_instance(worked_with("[0.5, 0.5]", "[[1, -2], [0, 1]]"));
  const Instance b = parse_instance(worked_with("[0.5, 0.5]", "[[1, -2], [0, 1.5]]"));
  CHECK(instance_hash(a) != instance_hash(b));
}

TEST_CASE("extended reals") {
  CHECK(extended(kInf) == "+inf");
  CHECK(extended(kNegInf) == "-inf");
  CHECK(extended(1.5) == 1.5);
  CHECK(extended_from_json("+inf") == kInf);
  CHECK(extended_from_json("-inf") == kNegInf);
  CHECK(extended_from_json(2.0) == 2.0);
}

TEST_CASE("solving the corpus") {
  const RunResult worked = run_solve(load_instance(corpus("worked_sum_nonnegative.json")));
  CHECK(worked.exit_code == kExitOk);
  CHECK(worked.report["primal"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(worked.report["dual"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));

  const RunResult zero = run_solve(load_instance(corpus("zero_position.json")));
  CHECK(zero.exit_code == kExitOk);
  CHECK(zero.report["primal"]["value"].get<double>() == doctest::Approx(0.0).epsilon(1e-6));

  const RunResult es = run_solve(load_instance(corpus("es_sum_of_losses_tilde.json")));
  CHECK(es.exit_code == kExitOk);
  CHECK(es.report["primal"]["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-6));

  const RunResult poly = run_solve(load_instance(corpus("polyhedral_sum_three.json")));
  CHECK(poly.exit_code == kExitOk);
  CHECK(poly.report["primal"]["value"].get<double>() == doctest::Approx(-0.25).epsilon(1e-6));

  // E[1 - exp(-(S + m)/2)] = -1/4 with S = (1, -1) gives m = -2 ln(1.25 / cosh(1/2)).
  const RunResult ex = run_solve(load_instance(corpus("exponential_floor.json")));
  CHECK(ex.exit_code == kExitOk);
  CHECK(ex.report["primal"]["value"].get<double>() ==
        doctest::Approx(-2.0 * std::log(1.25 / std::cosh(0.5))).epsilon(1e-6));

  const RunResult sf = run_solve(load_instance(corpus("shortfall_exponential.json")));
  CHECK(sf.exit_code == kExitOk);
  CHECK(sf.report["primal"]["value"].get<double>() == doctest::Approx(0.3250027473578644).epsilon(1e-7));
}

TEST_CASE("non-proper instances exit with code 4") {
  Instance inst = parse_instance(worked_with("[0.5, 0.5]", "[[1, -2], [0, 1]]"));
  inst.aggregation = AggregationSpec::custom(
      2, [](std::span<const double> x) { return x[0]; }, true, std::nullopt, "first");
  const RunResult r = run_solve(inst);
  CHECK(r.exit_code == kExitNotProper);
  CHECK(r.report["proper"] == false);
}

TEST_CASE("command-line exit codes") {
  CHECK(run_cli("solve " + corpus("worked_sum_nonnegative.json").string()) == kExitOk);
  const auto bad = write_temp("sysrisk_bad_probabilities.json", worked_with("[0.5, 0.4]", "[[1, -2], [0, 1]]"));
  CHECK(run_cli("solve " + bad.string()) == kExitValidation);
  const auto broken = write_temp("sysrisk_broken.json", "{\"probabilities\": [");
  CHECK(run_cli("solve " + broken.string()) == kExitValidation);
  CHECK(run_cli("oracle " + corpus("worked_sum_nonnegative.json").string() + " --grid 2") == kExitValidation);
  CHECK(run_cli("solve /nonexistent/instance.json") == kExitValidation);
  std::filesystem::remove(bad);
  std::filesystem::remove(broken);
}
