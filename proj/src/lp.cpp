#include "sysrisk/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sysrisk {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-10;
constexpr std::size_t kDegenerateRun = 40;

class Tableau {
 public:
  Tableau(std::size_t m, std::size_t ncols) : m_(m), w_(ncols + 1), t_(m * (ncols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * w_ + j]; }
  double& rhs(std::size_t i) { return t_[i * w_ + w_ - 1]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return w_ - 1; }

  void pivot(std::size_t r, std::size_t j, std::vector<double>& obj) {
    double* pr = &t_[r * w_];
    const double inv = 1.0 / pr[j];
    for (std::size_t k = 0; k < w_; ++k) pr[k] *= inv;
    pr[j] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * w_];
      const double f = pi[j];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < w_; ++k) pi[k] -= f * pr[k];
      pi[j] = 0.0;
    }
    const double f = obj[j];
    if (f != 0.0) {
      for (std::size_t k = 0; k < w_; ++k) obj[k] -= f * pr[k];
      obj[j] = 0.0;
    }
    basis[r] = j;
  }

  void drop_row(std::size_t r) {
    t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r * w_),
             t_.begin() + static_cast<std::ptrdiff_t>((r + 1) * w_));
    basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
    --m_;
  }

  std::vector<std::size_t> basis;

 private:
  std::size_t m_;
  std::size_t w_;
  std::vector<double> t_;
};

enum class RunResult { optimal, unbounded, limit };

// obj holds reduced costs with obj.back() = -objective.
RunResult run_simplex(Tableau& T, std::vector<double>& obj, std::size_t allowed_cols,
                      PivotRule rule, std::size_t& pivots, std::size_t max_pivots) {
  std::size_t degenerate = 0;
  while (true) {
    if (pivots >= max_pivots) return RunResult::limit;
    const bool use_bland = rule == PivotRule::bland || degenerate >= kDegenerateRun;
    std::size_t enter = allowed_cols;
    double best = -kCostEps;
    for (std::size_t j = 0; j < allowed_cols; ++j) {
      if (obj[j] < best) {
        enter = j;
        if (use_bland) break;
        best = obj[j];
      }
    }
    if (enter == allowed_cols) return RunResult::optimal;
    std::size_t leave = T.rows();
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < T.rows(); ++i) {
      const double a = T.at(i, enter);
      if (a <= kPivotEps) continue;
      const double ratio = T.rhs(i) / a;
      if (leave == T.rows() || ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && T.basis[i] < T.basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == T.rows()) return RunResult::unbounded;
    degenerate = best_ratio <= 1e-12 ? degenerate + 1 : 0;
    T.pivot(leave, enter, obj);
    ++pivots;
  }
}

}  // namespace

LpSolution solve_lp(const LpProblem& lp, PivotRule rule, std::size_t max_pivots) {
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.rows.size();
  std::size_t n_slack = 0, n_art = 0;
  for (const auto& row : lp.rows) {
    if (row.coeffs.size() != n) throw std::invalid_argument("LP row has wrong length");
    const bool flip = row.rhs < 0.0;
    RowSense s = row.sense;
    if (flip && s == RowSense::less_equal) s = RowSense::greater_equal;
    else if (flip && s == RowSense::greater_equal) s = RowSense::less_equal;
    if (s != RowSense::equal) ++n_slack;
    if (s != RowSense::less_equal) ++n_art;
  }
  const std::size_t art0 = n + n_slack;
  const std::size_t ncols = art0 + n_art;
  Tableau T(m, ncols);
  T.basis.assign(m, 0);
  std::size_t slack = n, art = art0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
    RowSense s = row.sense;
    if (sign < 0 && s == RowSense::less_equal) s = RowSense::greater_equal;
    else if (sign < 0 && s == RowSense::greater_equal) s = RowSense::less_equal;
    for (std::size_t j = 0; j < n; ++j) T.at(i, j) = sign * row.coeffs[j];
    T.rhs(i) = sign * row.rhs;
    if (s == RowSense::less_equal) {
      T.at(i, slack) = 1.0;
      T.basis[i] = slack++;
    } else {
      if (s == RowSense::greater_equal) T.at(i, slack++) = -1.0;
      T.at(i, art) = 1.0;
      T.basis[i] = art++;
    }
  }

  LpSolution sol;
  std::vector<double> obj(ncols + 1, 0.0);
  if (n_art > 0) {
    for (std::size_t i = 0; i < m; ++i) {
      if (T.basis[i] < art0) continue;
      for (std::size_t j = 0; j <= ncols; ++j)
        if (j < art0 || j == ncols) obj[j] -= (j == ncols ? T.rhs(i) : T.at(i, j));
    }
    const RunResult r = run_simplex(T, obj, art0, rule, sol.pivots, max_pivots);
    if (r == RunResult::limit) {
      sol.status = LpStatus::iteration_limit;
      return sol;
    }
    double scale = 1.0;
    for (const auto& row : lp.rows) scale = std::max(scale, std::abs(row.rhs));
    if (-obj[ncols] > 1e-9 * scale) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    for (std::size_t i = 0; i < T.rows();) {
      if (T.basis[i] < art0) {
        ++i;
        continue;
      }
      std::size_t j = 0;
      while (j < art0 && std::abs(T.at(i, j)) <= 1e-9) ++j;
      if (j < art0) {
        T.pivot(i, j, obj);
        ++i;
      } else {
        T.drop_row(i);
      }
    }
  }

  std::fill(obj.begin(), obj.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) obj[j] = lp.cost[j];
  for (std::size_t i = 0; i < T.rows(); ++i) {
    const std::size_t b = T.basis[i];
    const double cb = b < n ? lp.cost[b] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < art0; ++j) obj[j] -= cb * T.at(i, j);
    obj[ncols] -= cb * T.rhs(i);
  }
  for (std::size_t i = 0; i < T.rows(); ++i) obj[T.basis[i]] = 0.0;
  const RunResult r = run_simplex(T, obj, art0, rule, sol.pivots, max_pivots);
  if (r == RunResult::limit) {
    sol.status = LpStatus::iteration_limit;
    return sol;
  }
  if (r == RunResult::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }
  sol.status = LpStatus::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < T.rows(); ++i)
    if (T.basis[i] < n) sol.x[T.basis[i]] = std::max(0.0, T.rhs(i));
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.cost[j] * sol.x[j];
  return sol;
}

}  // namespace sysrisk
