#include "sysrisk/utility.hpp"

#include <algorithm>
#include <cmath>

#include "sysrisk/scenario.hpp"

namespace sysrisk {

namespace {
constexpr double kFar = 1e4;
}

UtilityFn UtilityFn::linear() { return UtilityFn(Kind::linear, 0.0); }

UtilityFn UtilityFn::exponential(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ValidationError("exponential utility needs gamma > 0");
  return UtilityFn(Kind::exponential, gamma);
}

UtilityFn UtilityFn::power(double eta) {
  if (!(eta > 1.0) || !std::isfinite(eta)) throw ValidationError("power utility needs eta > 1");
  return UtilityFn(Kind::power, eta);
}

UtilityFn UtilityFn::linear_capped(double cap) {
  if (!(cap >= 0.0) || !std::isfinite(cap))
    throw ValidationError("linear_capped utility needs cap >= 0");
  return UtilityFn(Kind::linear_capped, cap);
}

std::string UtilityFn::name() const {
  switch (kind_) {
    case Kind::linear: return "linear";
    case Kind::exponential: return "exponential";
    case Kind::power: return "power";
    case Kind::linear_capped: return "linear_capped";
  }
  return "?";
}

double UtilityFn::operator()(double x) const {
  switch (kind_) {
    case Kind::linear: return x;
    case Kind::exponential: return -std::expm1(-param_ * x);
    case Kind::power: return x >= 0.0 ? x : -(std::pow(1.0 - x, param_) - 1.0) / param_;
    case Kind::linear_capped: return std::min(x, param_);
  }
  return 0.0;
}

double UtilityFn::right_derivative(double x) const {
  switch (kind_) {
    case Kind::linear: return 1.0;
    case Kind::exponential: return param_ * std::exp(-param_ * x);
    case Kind::power: return x >= 0.0 ? 1.0 : std::pow(1.0 - x, param_ - 1.0);
    case Kind::linear_capped: return x < param_ ? 1.0 : 0.0;
  }
  return 0.0;
}

double UtilityFn::left_derivative(double x) const {
  if (kind_ == Kind::linear_capped) return x <= param_ ? 1.0 : 0.0;
  return right_derivative(x);
}

double UtilityFn::slope_at_plus_inf() const {
  switch (kind_) {
    case Kind::linear:
    case Kind::power: return 1.0;
    case Kind::exponential:
    case Kind::linear_capped: return 0.0;
  }
  return 0.0;
}

double UtilityFn::slope_at_minus_inf() const {
  switch (kind_) {
    case Kind::linear:
    case Kind::linear_capped: return 1.0;
    case Kind::exponential:
    case Kind::power: return kInf;
  }
  return 0.0;
}

double UtilityFn::sup_value() const {
  switch (kind_) {
    case Kind::exponential: return 1.0;
    case Kind::linear_capped: return param_;
    default: return kInf;
  }
}

Interval UtilityFn::conjugate_domain() const {
  switch (kind_) {
    case Kind::linear: return {1.0, 1.0};
    case Kind::exponential: return {0.0, kInf};
    case Kind::power: return {1.0, kInf};
    case Kind::linear_capped: return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

bool UtilityFn::positively_homogeneous() const {
  return kind_ == Kind::linear || (kind_ == Kind::linear_capped && param_ == 0.0);
}

double UtilityFn::conjugate(double z, double tol) const {
  const Interval dom = conjugate_domain();
  if (!dom.contains(z, tol)) return kNegInf;
  z = std::clamp(z, dom.lo, dom.hi);
  switch (kind_) {
    case Kind::linear: return 0.0;
    case Kind::exponential: {
      if (z == 0.0) return -1.0;
      const double r = z / param_;
      return r - r * std::log(r) - 1.0;
    }
    case Kind::power: {
      if (z == 1.0) return 0.0;
      const double x = 1.0 - std::pow(z, 1.0 / (param_ - 1.0));
      return x * z + (std::pow(1.0 - x, param_) - 1.0) / param_;
    }
    case Kind::linear_capped: return param_ * (z - 1.0);
  }
  return kNegInf;
}

double UtilityFn::conjugate_argmin(double z, double tol) const {
  const Interval dom = conjugate_domain();
  if (z < dom.lo - tol) return kFar;
  if (z > dom.hi + tol) return -kFar;
  z = std::clamp(z, dom.lo, dom.hi);
  switch (kind_) {
    case Kind::linear: return 0.0;
    case Kind::exponential: {
      // Unattained at z = 0; a far point keeps the cut tight to within exp(-gamma x).
      const double zz = std::max(z, param_ * 1e-12);
      return -std::log(zz / param_) / param_;
    }
    case Kind::power: return z == 1.0 ? 0.0 : 1.0 - std::pow(z, 1.0 / (param_ - 1.0));
    case Kind::linear_capped: return param_;
  }
  return 0.0;
}

}  // namespace sysrisk
