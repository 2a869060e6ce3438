#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sysrisk/lp.hpp"

namespace sysrisk {

struct CuttingPlaneOptions {
  double tol = 1e-6;
  std::size_t max_iter = 10000;
  double initial_radius = 10.0;
  double max_radius = 1e13;
  std::size_t max_cuts = 60;
};

enum class CuttingPlaneStatus { optimal, unbounded, infeasible, iteration_limit };

struct CuttingPlaneResult {
  CuttingPlaneStatus status = CuttingPlaneStatus::iteration_limit;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> best;
  std::size_t iterations = 0;
};

// minimize cost . y  subject to  g(y) <= 0,  linear rows.
// g is convex; `constraint` returns g(y) and writes a subgradient. Moving along
// `restore` never increases g and eventually reaches g <= 0.
struct ConvexProgram {
  std::vector<double> cost;
  std::vector<LinearConstraint> rows;
  std::function<double(std::span<const double>, std::span<double>)> constraint;
  std::vector<double> start;    // feasible
  std::vector<double> restore;
};

CuttingPlaneResult minimize_over_convex_set(const ConvexProgram& prog,
                                            const CuttingPlaneOptions& opt);

// Affine majorant f(y') <= a . y' + b, tight (or nearly) at the query point.
struct TermCut {
  double value;  // f(y) at the query point, may be -inf
  std::vector<double> a;
  double b;
};

// maximize lin . y + sum_j weight_j f_j(y)  subject to bounds and linear rows,
// with each f_j concave and described through affine majorants.
struct HypographProgram {
  std::vector<double> lin;
  std::vector<double> lower;  // may be -inf
  std::vector<double> upper;  // may be +inf
  std::vector<LinearConstraint> rows;
  std::vector<double> weights;
  std::function<TermCut(std::size_t, std::span<const double>)> term;
  std::vector<std::vector<TermCut>> initial_cuts;
  std::vector<double> center;
};

CuttingPlaneResult maximize_hypograph(const HypographProgram& prog,
                                      const CuttingPlaneOptions& opt);

}  // namespace sysrisk
