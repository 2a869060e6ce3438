#pragma once

#include <cstddef>
#include <optional>

#include <json.hpp>

#include "sysrisk/instance.hpp"

namespace sysrisk {

enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFailure = 1,
  kExitValidation = 2,
  kExitNonconvergence = 3,
  kExitNotProper = 4,
};

struct RunOptions {
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::uint64_t> seed;
  bool timings = false;
};

struct RunResult {
  nlohmann::json report;
  int exit_code = kExitOk;
};

// Applies command-line overrides to the instance's solver block.
void apply_overrides(Instance& inst, const RunOptions& opt);

RunResult run_solve(const Instance& inst, const RunOptions& opt = {});
RunResult run_verify(const Instance& inst, const RunOptions& opt = {});
RunResult run_oracle(const Instance& inst, std::size_t grid_points, const RunOptions& opt = {});

nlohmann::json to_json(const PrimalResult& r);
nlohmann::json to_json(const DualityReport& r);
nlohmann::json to_json(const Diagnostics& d);

}  // namespace sysrisk
