#pragma once

#include <cstdint>

#include "sysrisk/dual.hpp"
#include "sysrisk/primal.hpp"
#include "sysrisk/scenario.hpp"
#include "sysrisk/utility.hpp"

namespace sysrisk {

// Utility-based shortfall: rho_u(X) = inf { m : E[u(X + m)] >= u0 }.
class ShortfallSpec {
 public:
  // Throws ValidationError unless u(x) > u0 for some probed x.
  ShortfallSpec(UtilityFn u, double u0);

  const UtilityFn& utility() const noexcept { return u_; }
  double u0() const noexcept { return u0_; }

 private:
  UtilityFn u_;
  double u0_;
};

struct ShortfallOptions {
  double tol = 1e-6;
  std::size_t max_iter = 10000;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
};

double expected_utility(const RandomVariable& X, double m, const UtilityFn& u,
                        const ScenarioSpace& space);

PrimalResult rho_u_primal(const RandomVariable& X, const ShortfallSpec& spec,
                          const ScenarioSpace& space, double tol = 1e-9);

// Objective of the dual representation at density q and multiplier lambda.
double shortfall_dual_objective(const RandomVariable& X, const ShortfallSpec& spec,
                                const ScenarioSpace& space, std::span<const double> q,
                                double lambda);

// Maximizes the dual over densities q and lambda > 0. Z_star holds q as a 1 x n
// matrix and W_star the constant 1/lambda.
DualityReport rho_u_dual(const RandomVariable& X, const ShortfallSpec& spec,
                         const ScenarioSpace& space, const ShortfallOptions& opt = {});

}  // namespace sysrisk
