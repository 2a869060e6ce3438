#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sysrisk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Solvers treat values below this as a verdict of unboundedness.
inline constexpr double kUnboundedCap = -1e9;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScenarioSpace {
 public:
  explicit ScenarioSpace(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double prob(std::size_t w) const { return probs_[w]; }
  std::span<const double> probs() const noexcept { return probs_; }

  double expectation(std::span<const double> values) const;

 private:
  std::vector<double> probs_;
};

class RandomVariable {
 public:
  RandomVariable() = default;
  explicit RandomVariable(std::vector<double> values);
  static RandomVariable constant(std::size_t n, double c);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t w) const { return values_[w]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// d x n matrix over scenarios, row-major by institution.
template <class Tag>
class ScenarioMatrix {
 public:
  ScenarioMatrix() = default;
  ScenarioMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) throw DimensionError("matrix must be nonempty");
    if (values_.size() != rows_ * cols_)
      throw DimensionError("matrix has " + std::to_string(values_.size()) +
                           " entries, expected " + std::to_string(rows_ * cols_));
    for (double v : values_)
      if (!std::isfinite(v)) throw ValidationError("matrix entries must be finite");
  }
  static ScenarioMatrix zeros(std::size_t rows, std::size_t cols) {
    return ScenarioMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
  }
  static ScenarioMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw DimensionError("matrix must have at least one row");
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw DimensionError("ragged matrix rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return ScenarioMatrix(rows.size(), rows.front().size(), std::move(flat));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t w) const { return values_[i * cols_ + w]; }
  double& operator()(std::size_t i, std::size_t w) { return values_[i * cols_ + w]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * cols_, cols_);
  }
  std::span<const double> flat() const noexcept { return values_; }
  std::vector<double>& mutable_flat() noexcept { return values_; }

  // Column w as a point in R^d.
  std::vector<double> column(std::size_t w) const {
    std::vector<double> x(rows_);
    for (std::size_t i = 0; i < rows_; ++i) x[i] = (*this)(i, w);
    return x;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

using RandomVector = ScenarioMatrix<struct PositionTag>;
using DualVector = ScenarioMatrix<struct DensityTag>;

double pairing(const RandomVector& X, const DualVector& Z, const ScenarioSpace& space);
bool in_dual_simplex(const DualVector& Z, const ScenarioSpace& space, double tol = 1e-9);
double essential_sup(const RandomVariable& U);
double essential_inf(const RandomVariable& U);

// Adds m_i to every scenario of row i.
RandomVector shift(const RandomVector& X, std::span<const double> m);

void check_dimensions(const RandomVector& X, const ScenarioSpace& space);
void check_dimensions(const RandomVariable& U, const ScenarioSpace& space);

}  // namespace sysrisk
