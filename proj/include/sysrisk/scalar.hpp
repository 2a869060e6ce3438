#pragma once

#include <functional>

namespace sysrisk {

// Smallest m with pred(m) true, for pred monotone (false ... false true ... true).
// Returns -inf if pred holds at `lower_cap`, +inf if it fails at `upper_cap`.
double threshold_bisection(const std::function<bool(double)>& pred, double lo_guess,
                           double hi_guess, double tol, double lower_cap = -1e9,
                           double upper_cap = 1e9);

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
};

// Maximizes a unimodal function on [a, b] by golden-section search.
ScalarOptimum golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double tol, int max_iter = 200);

// Maximizes a quasi-concave function on [a, b]: scans `grid_points` log- or
// linearly spaced points, then refines around the best one.
ScalarOptimum scan_then_golden_max(const std::function<double(double)>& f, double a, double b,
                                   int grid_points, bool log_spaced, double tol);

}  // namespace sysrisk
