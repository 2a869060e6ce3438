#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "sysrisk/report.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("sysrisk");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("SYSRISK_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else spdlog::set_level(spdlog::level::err);
}

int emit(const sysrisk::RunResult& r, const std::string& out_path) {
  const std::string text = r.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      spdlog::error("cannot write {}", out_path);
      return sysrisk::kExitValidation;
    }
    out << text;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Systemic risk measures on finite scenario spaces"};
  app.require_subcommand(1);

  std::string path, out_path;
  sysrisk::RunOptions opt;
  double tol = 0.0;
  std::size_t max_iter = 0, grid = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("instance", path, "Instance JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "Write the report here instead of stdout");
    sub->add_option("--tol", tol, "Solver tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Seed for restarts and sampled checks");
    sub->add_flag("--timings", opt.timings, "Include wall-clock timings in the report");
  };
  CLI::App* solve = app.add_subcommand("solve", "Primal and dual values with diagnostics");
  CLI::App* verify = app.add_subcommand("verify", "Solve and run the invariant checks");
  CLI::App* oracle = app.add_subcommand("oracle", "Compare solvers with brute-force grids");
  add_common(solve);
  add_common(verify);
  add_common(oracle);
  oracle->add_option("--grid", grid, "Grid points per dimension")->required()->check(CLI::Range(3, 100001));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sysrisk::kExitValidation;
  }

  for (CLI::App* sub : {solve, verify, oracle}) {
    if (sub->count("--tol")) opt.tol = tol;
    if (sub->count("--max-iter")) opt.max_iter = max_iter;
    if (sub->count("--seed")) opt.seed = seed;
  }

  try {
    sysrisk::Instance inst = sysrisk::load_instance(path);
    sysrisk::apply_overrides(inst, opt);
    if (*solve) return emit(sysrisk::run_solve(inst, opt), out_path);
    if (*verify) return emit(sysrisk::run_verify(inst, opt), out_path);
    return emit(sysrisk::run_oracle(inst, grid, opt), out_path);
  } catch (const sysrisk::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sysrisk::kExitValidation;
  } catch (const sysrisk::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return sysrisk::kExitValidation;
  } catch (const sysrisk::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return sysrisk::kExitNonconvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return sysrisk::kExitValidation;
  }
}
