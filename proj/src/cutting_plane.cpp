#include "sysrisk/cutting_plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sysrisk/scenario.hpp"

namespace sysrisk {

namespace {

struct MasterSolve {
  LpStatus status;
  std::vector<double> y;
  double value = 0.0;
  bool box_active = false;
};

// LP over y with natural bounds; infinite sides are replaced by a box of radius R.
class BoxedMaster {
 public:
  BoxedMaster(std::vector<double> lo, std::vector<double> hi, std::vector<double> center)
      : lo_(std::move(lo)), hi_(std::move(hi)), center_(std::move(center)) {}

  MasterSolve solve(const std::vector<double>& cost, const std::vector<LinearConstraint>& fixed,
                    const std::vector<LinearConstraint>& cuts, double R) const {
    const std::size_t k = lo_.size();
    std::vector<double> L(k), U(k);
    for (std::size_t j = 0; j < k; ++j) {
      L[j] = std::isfinite(lo_[j]) ? lo_[j] : center_[j] - R;
      U[j] = std::isfinite(hi_[j]) ? hi_[j] : std::max(center_[j], L[j]) + R;
    }
    LpProblem lp;
    lp.cost = cost;
    auto push = [&](const LinearConstraint& r) {
      double rhs = r.rhs;
      for (std::size_t j = 0; j < k; ++j) rhs -= r.coeffs[j] * L[j];
      lp.add_row(r.coeffs, r.sense, rhs);
    };
    for (const auto& r : fixed) push(r);
    for (const auto& r : cuts) push(r);
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> e(k, 0.0);
      e[j] = 1.0;
      lp.add_row(std::move(e), RowSense::less_equal, U[j] - L[j]);
    }
    const LpSolution sol = solve_lp(lp, PivotRule::dantzig);
    MasterSolve out;
    out.status = sol.status;
    if (sol.status != LpStatus::optimal) return out;
    out.y.resize(k);
    const double slack = 1e-7 * (1.0 + R);
    for (std::size_t j = 0; j < k; ++j) {
      out.y[j] = sol.x[j] + L[j];
      if (!std::isfinite(lo_[j]) && sol.x[j] <= slack) out.box_active = true;
      if (!std::isfinite(hi_[j]) && sol.x[j] >= U[j] - L[j] - slack) out.box_active = true;
    }
    out.value = std::inner_product(cost.begin(), cost.end(), out.y.begin(), 0.0);
    return out;
  }

 private:
  std::vector<double> lo_, hi_, center_;
};

constexpr double kStallTolerance = 1e-6;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// Keeps the cut pool bounded by discarding the cuts with the largest slack at y.
void prune(std::vector<LinearConstraint>& cuts, const std::vector<double>& y, std::size_t max_cuts,
           std::size_t keep_newest) {
  max_cuts = std::max(max_cuts, keep_newest + 8);
  if (cuts.size() <= max_cuts) return;
  const std::size_t old = cuts.size() - keep_newest;
  std::vector<std::pair<double, std::size_t>> slack;
  for (std::size_t c = 0; c < old; ++c) {
    const double lhs = std::inner_product(cuts[c].coeffs.begin(), cuts[c].coeffs.end(), y.begin(), 0.0);
    slack.push_back({cuts[c].rhs - lhs, c});
  }
  std::sort(slack.begin(), slack.end());
  const std::size_t drop = cuts.size() - max_cuts;
  std::vector<bool> gone(cuts.size(), false);
  for (std::size_t k = 0; k < drop && k < slack.size(); ++k)
    gone[slack[slack.size() - 1 - k].second] = true;
  std::vector<LinearConstraint> kept;
  for (std::size_t c = 0; c < cuts.size(); ++c)
    if (!gone[c]) kept.push_back(std::move(cuts[c]));
  cuts = std::move(kept);
}

}  // namespace

CuttingPlaneResult minimize_over_convex_set(const ConvexProgram& prog,
                                            const CuttingPlaneOptions& opt) {
  const std::size_t k = prog.cost.size();
  CuttingPlaneResult res;
  std::vector<double> grad(k);
  auto objective = [&](const std::vector<double>& y) {
    return std::inner_product(prog.cost.begin(), prog.cost.end(), y.begin(), 0.0);
  };
  std::vector<LinearConstraint> cuts;
  auto add_cut = [&](const std::vector<double>& y, double g) {
    const double nrm = norm2(grad);
    if (!(nrm > 1e-14) || !std::isfinite(g)) return;
    LinearConstraint c{std::vector<double>(k), RowSense::less_equal, 0.0};
    double rhs = -g;
    for (std::size_t j = 0; j < k; ++j) {
      c.coeffs[j] = grad[j] / nrm;
      rhs += grad[j] * y[j];
    }
    c.rhs = rhs / nrm;
    cuts.push_back(std::move(c));
  };
  auto feasible_along_restore = [&](const std::vector<double>& y) {
    auto point = [&](double t) {
      std::vector<double> p = y;
      for (std::size_t j = 0; j < k; ++j) p[j] += t * prog.restore[j];
      return p;
    };
    double hi = 1.0;
    std::vector<double> scratch(k);
    while (prog.constraint(point(hi), scratch) > 0.0) {
      hi *= 2.0;
      if (hi > 1e15) throw SolverError("restore direction never reaches feasibility");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (prog.constraint(point(mid), scratch) <= 0.0 ? hi : lo) = mid;
    }
    return point(hi);
  };

  std::vector<double> inc = prog.start;
  if (prog.constraint(inc, grad) > 0.0) throw SolverError("cutting plane: start point infeasible");
  res.upper = objective(inc);
  res.best = inc;
  {
    const double g0 = prog.constraint(inc, grad);
    add_cut(inc, g0);
  }
  std::vector<double> lo(k, kNegInf), hi(k, kInf);
  BoxedMaster master(lo, hi, prog.start);
  double scale = 1.0;
  for (double v : prog.start) scale = std::max(scale, std::abs(v));
  double R = opt.initial_radius * scale;
  double lower = kNegInf;

  std::vector<double> previous;
  int repeats = 0;
  auto finish = [&](double gap_ok_tol) {
    // Numerical stall: keep the certified bound, report optimal only if it is tight.
    res.lower = std::min(lower, res.upper);
    res.status = res.upper - res.lower <= gap_ok_tol ? CuttingPlaneStatus::optimal
                                                     : CuttingPlaneStatus::iteration_limit;
    return res;
  };
  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    const MasterSolve ms = master.solve(prog.cost, prog.rows, cuts, R);
    const double loose = kStallTolerance * std::max(1.0, std::abs(res.upper));
    if (ms.status != LpStatus::optimal) {
      if (res.iterations == 0) throw SolverError("cutting plane master LP failed");
      return finish(loose);  // round-off after many cuts; keep what is certified
    }
    if (!ms.box_active && ms.value > res.upper + 1e-9 * std::max(1.0, std::abs(res.upper)))
      return finish(loose);  // the relaxation overshot the incumbent: LP round-off
    repeats = (!previous.empty() && max_abs_diff(previous, ms.y) <= 1e-12 * (1.0 + R)) ? repeats + 1 : 0;
    previous = ms.y;
    if (repeats >= 3 && !ms.box_active) {
      lower = std::max(lower, ms.value);
      return finish(loose);
    }
    const double g = prog.constraint(ms.y, grad);
    if (g <= 0.0) {
      if (ms.value < res.upper) {
        res.upper = ms.value;
        res.best = ms.y;
      }
    } else {
      add_cut(ms.y, g);
      const std::vector<double> yb = feasible_along_restore(ms.y);
      const double gb = prog.constraint(yb, grad);
      add_cut(yb, gb);
      const double vb = objective(yb);
      if (vb < res.upper) {
        res.upper = vb;
        res.best = yb;
      }
    }
    if (res.upper < kUnboundedCap || R > opt.max_radius) {
      res.status = CuttingPlaneStatus::unbounded;
      res.lower = kNegInf;
      return res;
    }
    const double thresh = opt.tol * std::max(1.0, std::abs(res.upper));
    if (res.upper - ms.value <= thresh) {
      if (!ms.box_active) {
        res.lower = std::max(lower, ms.value);
        res.status = CuttingPlaneStatus::optimal;
        return res;
      }
      const MasterSolve wide = master.solve(prog.cost, prog.rows, cuts, 4.0 * R);
      if (wide.status == LpStatus::optimal && wide.value >= ms.value - thresh) {
        res.lower = std::max(lower, std::min(ms.value, wide.value));
        res.status = CuttingPlaneStatus::optimal;
        return res;
      }
      R *= 4.0;
    } else if (ms.box_active && res.iterations % 25 == 24) {
      R *= 4.0;
    }
    if (!ms.box_active) lower = std::max(lower, ms.value);
    prune(cuts, ms.y, opt.max_cuts, 2 * k + 4);
  }
  res.lower = lower;
  res.status = CuttingPlaneStatus::iteration_limit;
  return res;
}

CuttingPlaneResult maximize_hypograph(const HypographProgram& prog,
                                      const CuttingPlaneOptions& opt) {
  const std::size_t k = prog.lin.size();
  const std::size_t m = prog.weights.size();
  const std::size_t nv = k + m;
  std::vector<double> lo(prog.lower), hi(prog.upper), center(prog.center);
  lo.resize(nv, kNegInf);
  hi.resize(nv, kInf);
  center.resize(nv, 0.0);
  BoxedMaster master(lo, hi, center);

  std::vector<double> cost(nv);
  for (std::size_t j = 0; j < k; ++j) cost[j] = -prog.lin[j];
  for (std::size_t t = 0; t < m; ++t) cost[k + t] = -prog.weights[t];
  std::vector<LinearConstraint> fixed;
  for (const auto& r : prog.rows) {
    LinearConstraint rr = r;
    rr.coeffs.resize(nv, 0.0);
    fixed.push_back(std::move(rr));
  }
  std::vector<LinearConstraint> cuts;
  auto add_cut = [&](std::size_t t, const TermCut& c) {
    if (!std::isfinite(c.b)) return;
    LinearConstraint row{std::vector<double>(nv, 0.0), RowSense::less_equal, c.b};
    double nrm = 1.0;
    for (std::size_t j = 0; j < k; ++j) nrm = std::max(nrm, std::abs(c.a[j]));
    for (std::size_t j = 0; j < k; ++j) row.coeffs[j] = -c.a[j] / nrm;
    row.coeffs[k + t] = 1.0 / nrm;
    row.rhs = c.b / nrm;
    cuts.push_back(std::move(row));
  };
  for (std::size_t t = 0; t < m && t < prog.initial_cuts.size(); ++t)
    for (const auto& c : prog.initial_cuts[t]) add_cut(t, c);

  CuttingPlaneResult res;
  res.lower = kNegInf;
  res.upper = kInf;
  double scale = 1.0;
  for (double v : prog.center) scale = std::max(scale, std::abs(v));
  double R = opt.initial_radius * scale;
  std::vector<double> y(k);
  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    const MasterSolve ms = master.solve(cost, fixed, cuts, R);
    if (ms.status != LpStatus::optimal && res.iterations > 0 && std::isfinite(res.lower)) {
      // Round-off after many cuts; the attained value stays valid.
      res.status = res.upper - res.lower <= kStallTolerance * std::max(1.0, std::abs(res.lower))
                       ? CuttingPlaneStatus::optimal
                       : CuttingPlaneStatus::iteration_limit;
      return res;
    }
    if (ms.status == LpStatus::infeasible && R * 16.0 <= opt.max_radius) {
      R *= 16.0;  // the feasible set may lie outside the trust box
      continue;
    }
    if (ms.status == LpStatus::infeasible) {
      res.status = CuttingPlaneStatus::infeasible;
      res.lower = res.upper = kNegInf;
      return res;
    }
    if (ms.status != LpStatus::optimal) throw SolverError("hypograph master LP failed");
    const double ub = -ms.value;
    if (!ms.box_active && ub < res.lower - 1e-9 * std::max(1.0, std::abs(res.lower))) {
      // The relaxation fell below a value already attained: LP round-off.
      res.upper = std::max(res.lower, std::min(res.upper, ub));
      res.status = CuttingPlaneStatus::optimal;
      return res;
    }
    std::copy(ms.y.begin(), ms.y.begin() + static_cast<std::ptrdiff_t>(k), y.begin());
    double f = std::inner_product(prog.lin.begin(), prog.lin.end(), y.begin(), 0.0);
    for (std::size_t t = 0; t < m; ++t) {
      const TermCut c = prog.term(t, y);
      if (c.value == kNegInf) f = kNegInf;
      else if (std::isfinite(f)) f += prog.weights[t] * c.value;
      const double tv = ms.y[k + t];
      if (!(c.value >= tv - 1e-12 * (1.0 + std::abs(tv)))) add_cut(t, c);
    }
    if (f > res.lower) {
      res.lower = f;
      res.best = y;
    }
    if (!ms.box_active) res.upper = std::min(res.upper, ub);
    const double thresh = opt.tol * std::max(1.0, std::abs(res.lower));
    if (std::isfinite(res.lower) && ub - res.lower <= thresh) {
      if (!ms.box_active) {
        res.status = CuttingPlaneStatus::optimal;
        return res;
      }
      const MasterSolve wide = master.solve(cost, fixed, cuts, 4.0 * R);
      if (wide.status == LpStatus::optimal && -wide.value <= ub + thresh) {
        res.upper = std::min(res.upper, std::max(ub, -wide.value));
        res.status = CuttingPlaneStatus::optimal;
        return res;
      }
      R *= 4.0;
    } else if (ms.box_active && res.iterations % 25 == 24) {
      R *= 4.0;
    }
    if (R > opt.max_radius) break;
    prune(cuts, ms.y, opt.max_cuts, 2 * m + 4);
  }
  res.status = CuttingPlaneStatus::iteration_limit;
  return res;
}

}  // namespace sysrisk
