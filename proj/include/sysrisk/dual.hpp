#pragma once

#include <optional>
#include <string>

#include "sysrisk/acceptance.hpp"
#include "sysrisk/aggregation.hpp"
#include "sysrisk/primal.hpp"
#include "sysrisk/scenario.hpp"

namespace sysrisk {

enum class DualStatus { optimal, unbounded, indeterminate };

struct SupportResult {
  double value = 0.0;  // extended real
  DualStatus status = DualStatus::optimal;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
};

// sigma of the systemic acceptance set: inf { (X|Z) : Lambda(X) in A }.
SupportResult support_systemic(const DualVector& Z, const AggregationSpec& agg,
                               const AcceptanceSpec& acc, const ScenarioSpace& space,
                               const SolverOptions& opt = {});

struct PenaltyEval {
  double value = 0.0;  // extended real
  std::optional<RandomVariable> w_star;
  bool strict_positive_branch = false;
  bool converged = true;
};

// sup over W in bar(A) of sigma_A(W) + E[1_{W>0} W Lambda*(Z/W)].
PenaltyEval alpha(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                  const ScenarioSpace& space, bool strict_positive, const SolverOptions& opt = {});
// Same with W restricted to E[W] = 1.
PenaltyEval alpha_tilde(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                        const ScenarioSpace& space, bool strict_positive,
                        const SolverOptions& opt = {});

enum class DualMode { rho, rho_tilde, shortfall };
std::string to_string(DualMode m);

struct DualityReport {
  PrimalResult primal;
  std::optional<double> dual_value;  // absent for non-proper instances
  std::optional<DualVector> Z_star;
  std::optional<RandomVariable> W_star;
  double gap_abs = 0.0;
  double gap_rel = 0.0;
  DualMode mode = DualMode::rho;
  bool degenerate = false;
  std::string note;
  // Dual objective at Z_star through the penalty formula and through sigma.
  std::optional<double> alpha_route;
  std::optional<double> sigma_route;
};

void fill_gaps(DualityReport& rep);

DualityReport dual_rho(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                       const ScenarioSpace& space, const SolverOptions& opt = {});
DualityReport dual_rho_tilde(const RandomVector& X, const AggregationSpec& agg,
                             const AcceptanceSpec& acc, const ScenarioSpace& space,
                             const SolverOptions& opt = {});

// Grid saddle check; see oracle::saddle_grid.
struct MinimaxReport {
  double inf_sup = 0.0;
  double sup_inf = 0.0;
  bool inf_sup_unbounded = false;
  bool sup_inf_unbounded = false;
  double discrepancy = 0.0;
  double resolution = 0.0;
};

MinimaxReport minimax_check(const DualVector& Z, const AggregationSpec& agg,
                            const AcceptanceSpec& acc, const ScenarioSpace& space,
                            std::size_t points_per_dim, double box);

// Z in D: some W in bar(A) with Lambda*(Z/W) finite scenario-wise.
bool conic_membership_D(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                        const ScenarioSpace& space);

}  // namespace sysrisk
