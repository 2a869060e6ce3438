#include "sysrisk/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sysrisk {

ScenarioSpace::ScenarioSpace(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("scenario space needs at least one scenario");
  for (double p : probs_) {
    if (!std::isfinite(p) || p <= 0.0)
      throw ValidationError("scenario probabilities must be strictly positive");
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("scenario probabilities sum to " + std::to_string(total) +
                          ", not 1 within 1e-12");
  for (double& p : probs_) p /= total;
}

double ScenarioSpace::expectation(std::span<const double> values) const {
  if (values.size() != probs_.size())
    throw DimensionError("expectation: length " + std::to_string(values.size()) +
                         " vs " + std::to_string(probs_.size()) + " scenarios");
  double s = 0.0;
  for (std::size_t w = 0; w < values.size(); ++w) s += probs_[w] * values[w];
  return s;
}

RandomVariable::RandomVariable(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DimensionError("random variable must be nonempty");
  for (double v : values_)
    if (!std::isfinite(v)) throw ValidationError("random variable entries must be finite");
}

RandomVariable RandomVariable::constant(std::size_t n, double c) {
  return RandomVariable(std::vector<double>(n, c));
}

double pairing(const RandomVector& X, const DualVector& Z, const ScenarioSpace& space) {
  if (X.rows() != Z.rows() || X.cols() != Z.cols() || X.cols() != space.size())
    throw DimensionError("pairing: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t w = 0; w < X.cols(); ++w) s += space.prob(w) * X(i, w) * Z(i, w);
  return s;
}

bool in_dual_simplex(const DualVector& Z, const ScenarioSpace& space, double tol) {
  if (Z.cols() != space.size()) throw DimensionError("in_dual_simplex: dimension mismatch");
  for (double v : Z.flat())
    if (v < 0.0) return false;
  for (std::size_t i = 0; i < Z.rows(); ++i)
    if (std::abs(space.expectation(Z.row(i)) - 1.0) > tol) return false;
  return true;
}

double essential_sup(const RandomVariable& U) {
  return *std::max_element(U.values().begin(), U.values().end());
}

double essential_inf(const RandomVariable& U) {
  return *std::min_element(U.values().begin(), U.values().end());
}

RandomVector shift(const RandomVector& X, std::span<const double> m) {
  if (m.size() != X.rows()) throw DimensionError("shift: allocation length mismatch");
  RandomVector Y = X;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t w = 0; w < X.cols(); ++w) Y(i, w) += m[i];
  return Y;
}

void check_dimensions(const RandomVector& X, const ScenarioSpace& space) {
  if (X.cols() != space.size())
    throw DimensionError("positions have " + std::to_string(X.cols()) + " scenarios, space has " +
                         std::to_string(space.size()));
}

void check_dimensions(const RandomVariable& U, const ScenarioSpace& space) {
  if (U.size() != space.size())
    throw DimensionError("random variable has " + std::to_string(U.size()) +
                         " scenarios, space has " + std::to_string(space.size()));
}

}  // namespace sysrisk
