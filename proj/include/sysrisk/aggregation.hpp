#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/scenario.hpp"
#include "sysrisk/utility.hpp"

namespace sysrisk {

struct AffineDominance {
  double a;
  double b;
};

enum class ConjugateStatus { finite, neg_infinite, indeterminate };

struct ConjugateValue {
  double value = 0.0;
  ConjugateStatus status = ConjugateStatus::finite;
  // A (near-)minimizer of <x,z> - Lambda(x); for -inf values, a point far along
  // a direction of decrease.
  std::vector<double> argmin;
};

// Domain of the concave conjugate: a box, optionally intersected with the
// diagonal {z_1 = ... = z_d}.
struct ConjugateDomain {
  std::vector<Interval> box;
  bool equal_coordinates = false;
};

// Lambda: R^d -> R. Built-ins are either separable, Lambda(x) = sum_i u_i(x_i),
// or act on the total, Lambda(x) = u(sum_i x_i).
class AggregationSpec {
 public:
  enum class Kind { sum, sum_of_losses, utility_of_sum, componentwise_utility, custom };
  using Function = std::function<double(std::span<const double>)>;

  static AggregationSpec sum(std::size_t d);
  static AggregationSpec sum_of_losses(std::size_t d);
  static AggregationSpec utility_of_sum(std::size_t d, UtilityFn u);
  static AggregationSpec componentwise_utility(std::vector<UtilityFn> us);
  // Custom kinds carry user-supplied metadata; affine dominance is verified on a grid.
  static AggregationSpec custom(std::size_t d, Function f, bool positively_homogeneous,
                                std::optional<AffineDominance> dominance, std::string label);

  Kind kind() const noexcept { return kind_; }
  std::string kind_name() const;
  std::size_t dimension() const noexcept { return d_; }
  bool positively_homogeneous() const noexcept { return homogeneous_; }
  const std::optional<AffineDominance>& affine_dominance() const noexcept { return dominance_; }
  bool is_custom() const noexcept { return kind_ == Kind::custom; }
  bool acts_on_total() const noexcept { return kind_ == Kind::utility_of_sum; }
  // One utility per coordinate for separable kinds; a single utility for utility_of_sum.
  const std::vector<UtilityFn>& parts() const { return parts_; }

  double operator()(std::span<const double> x) const;
  // Right derivatives per coordinate (a supergradient for the built-ins).
  void supergradient(std::span<const double> x, std::span<double> out) const;
  ConjugateDomain conjugate_domain() const;

 private:
  AggregationSpec() = default;
  Kind kind_ = Kind::sum;
  std::size_t d_ = 0;
  bool homogeneous_ = false;
  std::optional<AffineDominance> dominance_;
  std::vector<UtilityFn> parts_;
  Function custom_;
  std::string label_;
};

RandomVariable eval_vector(const AggregationSpec& agg, const RandomVector& X);

// Closed form for built-ins, numeric fallback for custom kinds.
ConjugateValue concave_conjugate(const AggregationSpec& agg, std::span<const double> z,
                                 double tol = 1e-9);
// Derivative-free minimization of <x,z> - Lambda(x), usable for any kind.
ConjugateValue numeric_conjugate(const AggregationSpec& agg, std::span<const double> z,
                                 double tol = 1e-9, int max_iter = 2000);

// w Lambda*(z / w) for w > 0; 0 at (0, 0); -inf at (z != 0, 0). The argmin
// field is a point x whose cut <x,z'> - Lambda(x) w' bounds the perspective.
ConjugateValue perspective(const AggregationSpec& agg, std::span<const double> z, double w,
                           double tol = 1e-9);

struct AdmissibilityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

AdmissibilityReport check_admissibility(const AggregationSpec& agg,
                                        const std::vector<std::vector<double>>& grid);
// Product grid over {-3,-1,-0.25,0,0.5,2}^d.
std::vector<std::vector<double>> default_admissibility_grid(std::size_t d);
// Checks Lambda(x) <= a sum(x) + b on the grid.
bool verify_affine_dominance(const AggregationSpec& agg, const AffineDominance& ab,
                             const std::vector<std::vector<double>>& grid);

}  // namespace sysrisk
