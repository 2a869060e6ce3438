#include "sysrisk/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sysrisk {

double threshold_bisection(const std::function<bool(double)>& pred, double lo, double hi,
                           double tol, double lower_cap, double upper_cap) {
  if (hi < lo) std::swap(lo, hi);
  double step = std::max(1.0, hi - lo);
  while (!pred(hi)) {
    if (hi >= upper_cap) return std::numeric_limits<double>::infinity();
    lo = hi;
    hi = std::min(upper_cap, hi + step);
    step *= 2.0;
  }
  step = std::max(1.0, hi - lo);
  while (pred(lo)) {
    if (lo <= lower_cap) return -std::numeric_limits<double>::infinity();
    hi = lo;
    lo = std::max(lower_cap, lo - step);
    step *= 2.0;
  }
  // pred(lo) false, pred(hi) true
  for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

ScalarOptimum golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double tol, int max_iter) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol * std::max(1.0, std::abs(a) + std::abs(b));
       ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? ScalarOptimum{c, fc} : ScalarOptimum{d, fd};
}

ScalarOptimum scan_then_golden_max(const std::function<double(double)>& f, double a, double b,
                                   int grid_points, bool log_spaced, double tol) {
  std::vector<double> xs(grid_points);
  for (int k = 0; k < grid_points; ++k) {
    const double t = grid_points == 1 ? 0.0 : double(k) / (grid_points - 1);
    xs[k] = log_spaced ? std::exp(std::log(a) + t * (std::log(b) - std::log(a)))
                       : a + t * (b - a);
  }
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_points; ++k) {
    const double v = f(xs[k]);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  ScalarOptimum result{xs[best], best_val};
  if (!std::isfinite(best_val)) return result;
  const double lo = xs[std::max(0, best - 1)];
  const double hi = xs[std::min(grid_points - 1, best + 1)];
  ScalarOptimum refined;
  if (log_spaced) {
    refined = golden_section_max([&](double s) { return f(std::exp(s)); }, std::log(lo),
                                 std::log(hi), tol);
    refined.x = std::exp(refined.x);
  } else {
    refined = golden_section_max(f, lo, hi, tol);
  }
  return refined.value > result.value ? refined : result;
}

}  // namespace sysrisk
