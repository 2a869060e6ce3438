#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sysrisk/acceptance.hpp"
#include "sysrisk/aggregation.hpp"
#include "sysrisk/scenario.hpp"

namespace sysrisk {

struct SolverOptions {
  double tol = 1e-6;
  std::size_t max_iter = 10000;
};

enum class PrimalStatus { optimal, unbounded_below, infeasible, tolerance_reached };
std::string to_string(PrimalStatus s);

struct PrimalResult {
  double value = 0.0;                  // extended real
  std::optional<std::vector<double>> m_star;
  PrimalStatus status = PrimalStatus::optimal;
  std::size_t iterations = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
};

// inf { sum m : Lambda(X + m) in A }.
PrimalResult rho(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                 const ScenarioSpace& space, const SolverOptions& opt = {});

// rho_A(Lambda(X)).
PrimalResult rho_tilde(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                       const ScenarioSpace& space, const SolverOptions& opt = {});

struct Diagnostics {
  double rho_at_zero = 0.0;
  bool proper = false;
  bool M0_intersection_trivial = false;
  // A contains no strictly negative constant, and Lambda < 0 on sampled M0 \ {0}.
  bool negative_constants_rejected = false;
  bool affine_dominance_ok = false;
  std::optional<RandomVector> interior_point_found;
};

Diagnostics diagnostics(const RandomVector& X_probe, const AggregationSpec& agg,
                        const AcceptanceSpec& acc, const ScenarioSpace& space,
                        const SolverOptions& opt = {});

// Zero-sum allocations sampled on spheres of several radii.
std::vector<std::vector<double>> sample_M0(std::size_t d);

}  // namespace sysrisk
