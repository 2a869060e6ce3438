#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/lp.hpp"
#include "sysrisk/scenario.hpp"

namespace sysrisk {

class AcceptanceSpec {
 public:
  enum class Kind { nonnegative, expectation_floor, expected_shortfall, polyhedral };

  static AcceptanceSpec nonnegative();
  static AcceptanceSpec expectation_floor(double u0);
  static AcceptanceSpec expected_shortfall(double level);
  // A = { U : E[U W_k] >= a_k for all k } with W_k >= 0.
  static AcceptanceSpec polyhedral(std::vector<RandomVariable> densities, std::vector<double> bounds);

  Kind kind() const noexcept { return kind_; }
  std::string kind_name() const;
  double floor() const noexcept { return param_; }
  double level() const noexcept { return param_; }
  const std::vector<RandomVariable>& densities() const noexcept { return densities_; }
  const std::vector<double>& bounds() const noexcept { return bounds_; }

  bool is_cone() const;
  // Validates parameters that depend on the scenario count.
  void check_against(const ScenarioSpace& space) const;

 private:
  AcceptanceSpec() = default;
  Kind kind_ = Kind::nonnegative;
  double param_ = 0.0;
  std::vector<RandomVariable> densities_;
  std::vector<double> bounds_;
};

double var_level(const RandomVariable& U, double level, const ScenarioSpace& space);
double es_level(const RandomVariable& U, double level, const ScenarioSpace& space);
// Worst-case density W of ES: ES(U) = -E[U W], 0 <= W <= 1/level, E[W] = 1.
std::vector<double> es_density(std::span<const double> U, double level, const ScenarioSpace& space);

bool contains(const AcceptanceSpec& acc, const RandomVariable& U, const ScenarioSpace& space,
              double tol = 1e-9);
// sigma_A(W) = inf_{U in A} E[U W]; -inf outside the barrier cone.
double support_function(const AcceptanceSpec& acc, const RandomVariable& W,
                        const ScenarioSpace& space, double tol = 1e-9);
bool in_barrier_cone(const AcceptanceSpec& acc, const RandomVariable& W, const ScenarioSpace& space,
                     double tol = 1e-9);
double rho_A(const AcceptanceSpec& acc, const RandomVariable& U, const ScenarioSpace& space,
             double tol = 1e-9);

// Convex violation g(U): U in A iff g(U) <= 0. `grad` receives dg/dU_w.
double acceptance_violation(const AcceptanceSpec& acc, std::span<const double> U,
                            const ScenarioSpace& space, std::span<double> grad);

// bar(A) written as W = M theta with theta >= 0 and extra linear rows on theta;
// sigma_A(M theta) >= c . theta, with equality except possibly for polyhedral sets
// where several theta represent the same W.
struct BarrierParameterization {
  std::size_t dim = 0;
  std::vector<std::vector<double>> M;  // n rows, dim columns
  std::vector<double> sigma;           // c
  std::vector<LinearConstraint> rows;  // rows over theta

  std::vector<double> density(std::span<const double> theta) const;
};

BarrierParameterization barrier_parameterization(const AcceptanceSpec& acc,
                                                 const ScenarioSpace& space);

}  // namespace sysrisk
