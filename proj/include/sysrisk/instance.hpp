#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "sysrisk/acceptance.hpp"
#include "sysrisk/aggregation.hpp"
#include "sysrisk/dual.hpp"
#include "sysrisk/scenario.hpp"
#include "sysrisk/shortfall.hpp"

namespace sysrisk {

// Malformed JSON; the message carries line and column.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double tol = 1e-6;
  std::size_t max_iter = 10000;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
};

struct Instance {
  ScenarioSpace space;
  RandomVector X;
  DualMode mode = DualMode::rho;
  std::optional<AggregationSpec> aggregation;  // required unless mode is shortfall
  std::optional<AcceptanceSpec> acceptance;    // required unless mode is shortfall
  std::optional<ShortfallSpec> shortfall;      // required iff mode is shortfall
  SolverConfig solver;
};

nlohmann::json utility_to_json(const UtilityFn& u);
UtilityFn utility_from_json(const nlohmann::json& j, const std::string& field);

Instance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const Instance& inst);

Instance load_instance(const std::filesystem::path& path);
Instance parse_instance(const std::string& text);

// Extended reals: finite values stay numbers, infinities become "+inf"/"-inf".
nlohmann::json extended(double v);
double extended_from_json(const nlohmann::json& j);

// FNV-1a over the canonical serialization.
std::uint64_t instance_hash(const Instance& inst);

}  // namespace sysrisk
