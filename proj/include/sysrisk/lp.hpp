#pragma once

#include <cstddef>
#include <vector>

namespace sysrisk {

enum class RowSense { less_equal, greater_equal, equal };

// A linear row over some problem's variables.
struct LinearConstraint {
  std::vector<double> coeffs;
  RowSense sense;
  double rhs;
};

// minimize cost . x  subject to rows, x >= 0.
struct LpProblem {
  std::vector<double> cost;
  std::vector<LinearConstraint> rows;

  std::size_t num_vars() const { return cost.size(); }
  void add_row(std::vector<double> coeffs, RowSense sense, double rhs) {
    rows.push_back({std::move(coeffs), sense, rhs});
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

enum class PivotRule {
  bland,
  // Largest reduced cost; switches to Bland's rule after a run of degenerate pivots.
  dantzig,
};

// Dense two-phase tableau simplex.
LpSolution solve_lp(const LpProblem& lp, PivotRule rule = PivotRule::bland,
                    std::size_t max_pivots = 200000);

}  // namespace sysrisk
