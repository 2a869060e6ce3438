#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sysrisk/acceptance.hpp"
#include "sysrisk/aggregation.hpp"
#include "sysrisk/scenario.hpp"

// Brute-force references. Nothing here calls the solver code paths: Lambda,
// acceptance membership, sigma_A and ES are re-derived from their definitions.
namespace sysrisk::oracle {

enum class Execution { serial, parallel };

struct GridSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> points;

  static GridSpec uniform(std::size_t dims, double lo, double hi, std::size_t points);
  std::size_t dims() const { return points.size(); }
  double step(std::size_t i) const { return (upper[i] - lower[i]) / double(points[i] - 1); }
  double resolution() const;  // largest step
  std::size_t size() const;
  double coordinate(std::size_t i, std::size_t k) const { return lower[i] + double(k) * step(i); }
  void validate() const;
};

double lambda_ref(const AggregationSpec& agg, std::span<const double> x);
bool accepts_ref(const AcceptanceSpec& acc, std::span<const double> U, const ScenarioSpace& space,
                 double tol = 1e-9);
double var_ref(std::span<const double> U, double level, const ScenarioSpace& space);
// Rockafellar-Uryasev minimum over thresholds.
double es_ref(std::span<const double> U, double level, const ScenarioSpace& space);
// Midpoint rule over `points` cells of (1/level) int_0^level VaR_mu dmu.
double es_riemann(std::span<const double> U, double level, const ScenarioSpace& space,
                  std::size_t points);

struct GridMin {
  double value = 0.0;  // +inf when no grid point is feasible
  std::vector<double> argmin;
  bool boundary_hit = false;
};

// min sum(m) over grid points m with Lambda(X + m) in A.
GridMin rho_grid(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                 const ScenarioSpace& space, const GridSpec& grid,
                 Execution exec = Execution::parallel);

// min m over an m-grid with E[u(X + m)] >= u0; +inf if none qualifies.
double shortfall_grid(const RandomVariable& X, const UtilityFn& u, double u0,
                      const ScenarioSpace& space, const GridSpec& grid,
                      Execution exec = Execution::parallel);

struct AlphaGrid {
  double value = 0.0;
  bool unbounded = false;
  double value_doubled_box = 0.0;
};

// sup over gridded W in bar(A) of sigma_A(W) + min over gridded X of (X|Z) - E[Lambda(X) W].
// Each scenario's W candidates are the uniform grid on [0, w_max] plus the entries of Z.
AlphaGrid alpha_raw_grid(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                         const ScenarioSpace& space, std::size_t points, double box, double w_max,
                         Execution exec = Execution::parallel);

struct SaddleValues {
  double inf_sup = 0.0;
  double sup_inf = 0.0;
  bool inf_sup_unbounded = false;
  bool sup_inf_unbounded = false;
  double resolution = 0.0;
  double discrepancy() const;
};

// Both iterated optimizations of K_Z(X,W) = sigma_A(W) + (X|Z) - E[Lambda(X) W].
SaddleValues saddle_grid(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                         const ScenarioSpace& space, std::size_t points, double box,
                         Execution exec = Execution::parallel);

}  // namespace sysrisk::oracle
