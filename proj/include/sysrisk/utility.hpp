#pragma once

#include <string>

namespace sysrisk {

struct Interval {
  double lo;
  double hi;
  bool contains(double x, double tol) const { return x >= lo - tol && x <= hi + tol; }
};

// Concave nondecreasing u: R -> R with u(0) = 0.
//   linear          u(x) = x
//   exponential     u(x) = 1 - exp(-gamma x)
//   power           u(x) = x for x >= 0, -((1-x)^eta - 1)/eta for x < 0   (eta > 1)
//   linear_capped   u(x) = min(x, cap)                                    (cap >= 0)
class UtilityFn {
 public:
  enum class Kind { linear, exponential, power, linear_capped };

  static UtilityFn linear();
  static UtilityFn exponential(double gamma);
  static UtilityFn power(double eta);
  static UtilityFn linear_capped(double cap);

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  std::string name() const;

  double operator()(double x) const;
  double right_derivative(double x) const;
  double left_derivative(double x) const;
  // Limits of the derivative at +inf and -inf.
  double slope_at_plus_inf() const;
  double slope_at_minus_inf() const;
  double sup_value() const;

  // u*(z) = inf_x { x z - u(x) }, -inf outside the domain. Points within `tol`
  // of the domain are clamped onto it.
  double conjugate(double z, double tol = 1e-9) const;
  // A point x where x z - u(x) is (close to) its infimum. Outside the domain it
  // returns a far point along which x z - u(x) decreases, so the value
  // x z - u(x) w is still a valid upper bound for the perspective.
  double conjugate_argmin(double z, double tol = 1e-9) const;
  Interval conjugate_domain() const;
  bool positively_homogeneous() const;

  bool operator==(const UtilityFn&) const = default;

 private:
  UtilityFn(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_;
  double param_;
};

}  // namespace sysrisk
