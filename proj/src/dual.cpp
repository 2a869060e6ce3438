#include "sysrisk/dual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sysrisk/cutting_plane.hpp"
#include "sysrisk/oracle.hpp"

namespace sysrisk {

std::string to_string(DualMode m) {
  switch (m) {
    case DualMode::rho: return "rho";
    case DualMode::rho_tilde: return "rho_tilde";
    case DualMode::shortfall: return "shortfall";
  }
  return "?";
}

void fill_gaps(DualityReport& rep) {
  if (!rep.dual_value || !std::isfinite(rep.primal.value) || !std::isfinite(*rep.dual_value)) {
    rep.gap_abs = rep.gap_rel = 0.0;
    if (rep.dual_value && *rep.dual_value != rep.primal.value) rep.gap_abs = rep.gap_rel = kInf;
    return;
  }
  rep.gap_abs = std::abs(rep.primal.value - *rep.dual_value);
  rep.gap_rel = rep.gap_abs / std::max(1.0, std::abs(rep.primal.value));
}

namespace {

void require_builtin(const AggregationSpec& agg) {
  if (agg.is_custom())
    throw std::invalid_argument("dual computations need a built-in aggregation kind");
}

void check_Z(const DualVector& Z, const AggregationSpec& agg, const ScenarioSpace& space) {
  if (Z.cols() != space.size() || Z.rows() != agg.dimension())
    throw DimensionError("dual vector dimensions do not match the instance");
}

bool has_negative(const DualVector& Z) {
  return std::any_of(Z.flat().begin(), Z.flat().end(), [](double v) { return v < 0.0; });
}

// Rows over theta forcing Z(w) into W(w) * dom(Lambda*). Returns false when the
// diagonal constraint of utility_of_sum already fails.
bool domain_rows(const DualVector& Z, const AggregationSpec& agg, const BarrierParameterization& bp,
                 std::vector<LinearConstraint>& rows) {
  const ConjugateDomain dom = agg.conjugate_domain();
  const std::size_t d = Z.rows(), n = Z.cols();
  for (std::size_t w = 0; w < n; ++w) {
    if (dom.equal_coordinates) {
      for (std::size_t i = 1; i < d; ++i)
        if (std::abs(Z(i, w) - Z(0, w)) > 1e-9 * std::max(1.0, std::abs(Z(0, w)))) return false;
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double z = Z(i, w);
      const double slack = 1e-10 * (1.0 + std::abs(z));
      if (std::isfinite(dom.box[i].lo)) {
        std::vector<double> c(bp.dim);
        for (std::size_t j = 0; j < bp.dim; ++j) c[j] = dom.box[i].lo * bp.M[w][j];
        rows.push_back({std::move(c), RowSense::less_equal, z + slack});
      }
      if (std::isfinite(dom.box[i].hi)) {
        std::vector<double> c(bp.dim);
        for (std::size_t j = 0; j < bp.dim; ++j) c[j] = -dom.box[i].hi * bp.M[w][j];
        rows.push_back({std::move(c), RowSense::less_equal, -z + slack});
      }
    }
  }
  return true;
}

LinearConstraint normalization_row(const BarrierParameterization& bp, const ScenarioSpace& space) {
  std::vector<double> c(bp.dim, 0.0);
  for (std::size_t w = 0; w < space.size(); ++w)
    for (std::size_t j = 0; j < bp.dim; ++j) c[j] += space.prob(w) * bp.M[w][j];
  return {std::move(c), RowSense::equal, 1.0};
}

double honest_penalty(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                      const ScenarioSpace& space, std::span<const double> W) {
  double v = support_function(acc, RandomVariable(std::vector<double>(W.begin(), W.end())), space, 1e-8);
  if (v == kNegInf) return kNegInf;
  for (std::size_t w = 0; w < space.size(); ++w) {
    const ConjugateValue c = perspective(agg, Z.column(w), W[w], 1e-8);
    if (c.status != ConjugateStatus::finite) return kNegInf;
    v += space.prob(w) * c.value;
  }
  return v;
}

PenaltyEval penalty(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                    const ScenarioSpace& space, bool strict_positive, bool normalized,
                    const SolverOptions& opt) {
  require_builtin(agg);
  check_Z(Z, agg, space);
  acc.check_against(space);
  PenaltyEval out;
  out.strict_positive_branch = strict_positive;
  if (has_negative(Z)) {
    out.value = kNegInf;
    return out;
  }
  const std::size_t n = space.size(), d = agg.dimension();
  const BarrierParameterization bp = barrier_parameterization(acc, space);
  std::vector<LinearConstraint> rows = bp.rows;
  if (!domain_rows(Z, agg, bp, rows)) {
    out.value = kNegInf;
    return out;
  }
  if (normalized) rows.push_back(normalization_row(bp, space));
  {
    // Settle feasibility without a trust box; a huge box blurs it numerically.
    LpProblem feas;
    feas.cost.assign(bp.dim, 0.0);
    feas.rows = rows;
    if (solve_lp(feas, PivotRule::dantzig).status == LpStatus::infeasible) {
      out.value = kNegInf;
      return out;
    }
  }

  if (strict_positive) {
    // Largest uniform floor tau on W, capped at 1; the branch keeps W >= 1e-7 tau.
    LpProblem lp;
    lp.cost.assign(bp.dim + 1, 0.0);
    lp.cost[bp.dim] = -1.0;
    for (const auto& r : rows) {
      auto c = r.coeffs;
      c.push_back(0.0);
      lp.add_row(std::move(c), r.sense, r.rhs);
    }
    for (std::size_t w = 0; w < n; ++w) {
      std::vector<double> c(bp.dim + 1);
      for (std::size_t j = 0; j < bp.dim; ++j) c[j] = -bp.M[w][j];
      c[bp.dim] = 1.0;
      lp.add_row(std::move(c), RowSense::less_equal, 0.0);
    }
    std::vector<double> cap(bp.dim + 1, 0.0);
    cap[bp.dim] = 1.0;
    lp.add_row(std::move(cap), RowSense::less_equal, 1.0);
    const LpSolution sol = solve_lp(lp, PivotRule::dantzig);
    if (sol.status != LpStatus::optimal || sol.x[bp.dim] <= 1e-12) {
      out.value = kNegInf;
      return out;
    }
    const double eta = 1e-7 * sol.x[bp.dim];
    for (std::size_t w = 0; w < n; ++w)
      rows.push_back({bp.M[w], RowSense::greater_equal, eta});
  }

  HypographProgram prog;
  prog.lin = bp.sigma;
  prog.lower.assign(bp.dim, 0.0);
  prog.upper.assign(bp.dim, kInf);
  prog.rows = rows;
  prog.center.assign(bp.dim, 1.0);
  prog.weights.assign(space.probs().begin(), space.probs().end());
  std::vector<std::vector<double>> Zcols(n);
  for (std::size_t w = 0; w < n; ++w) Zcols[w] = Z.column(w);
  auto cut_from = [&](std::size_t w, const std::vector<double>& x, double value) {
    TermCut c{value, std::vector<double>(bp.dim), 0.0};
    const double lx = agg(x);
    for (std::size_t j = 0; j < bp.dim; ++j) c.a[j] = -lx * bp.M[w][j];
    c.b = std::inner_product(x.begin(), x.end(), Zcols[w].begin(), 0.0);
    return c;
  };
  // The domain rows carry a little slack; clamp W back into the exact range
  // W lo_i <= z_i <= W hi_i so the perspective does not flip to -inf.
  const ConjugateDomain dom = agg.conjugate_domain();
  std::vector<double> w_floor(n, 0.0), w_cap(n, kInf);
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t i = 0; i < d; ++i) {
      const double z = Z(i, w);
      if (dom.box[i].lo > 0.0) w_cap[w] = std::min(w_cap[w], z / dom.box[i].lo);
      if (std::isfinite(dom.box[i].hi) && dom.box[i].hi > 0.0) w_floor[w] = std::max(w_floor[w], z / dom.box[i].hi);
    }
  prog.term = [&](std::size_t w, std::span<const double> theta) {
    double W = 0.0;
    for (std::size_t j = 0; j < bp.dim; ++j) W += bp.M[w][j] * theta[j];
    if (w_floor[w] <= w_cap[w]) W = std::clamp(W, w_floor[w], w_cap[w]);
    const ConjugateValue pv = perspective(agg, Zcols[w], std::max(W, 0.0), 1e-9);
    return cut_from(w, pv.argmin, pv.status == ConjugateStatus::finite ? pv.value : kNegInf);
  };
  prog.initial_cuts.resize(n);
  for (std::size_t w = 0; w < n; ++w)
    for (double c : {0.0, 1.0, -1.0, 10.0, -10.0})
      prog.initial_cuts[w].push_back(cut_from(w, std::vector<double>(d, c), 0.0));

  CuttingPlaneOptions cpo;
  cpo.tol = std::min(opt.tol, 1e-8);
  cpo.max_iter = std::min<std::size_t>(opt.max_iter, 3000);
  // W scales with Z, so the trust box does too.
  cpo.initial_radius = 10.0 * std::max(1.0, *std::max_element(Z.flat().begin(), Z.flat().end()));
  const CuttingPlaneResult cp = maximize_hypograph(prog, cpo);
  out.converged = cp.status == CuttingPlaneStatus::optimal || cp.status == CuttingPlaneStatus::infeasible;
  if (cp.status == CuttingPlaneStatus::infeasible || cp.best.empty() || cp.lower == kNegInf) {
    out.value = kNegInf;
    return out;
  }
  const std::vector<double> W = bp.density(cp.best);
  out.value = std::max(cp.lower, honest_penalty(Z, agg, acc, space, W));
  out.w_star = RandomVariable(W);
  return out;
}

// 1-D convex problem min_s  s - sum_w q_w u(Y_w + s).
struct Inner1D {
  double value = 0.0;
  double s = 0.0;
  bool unbounded = false;
};

Inner1D minimize_allocation_1d(std::span<const double> Y, std::span<const double> q, const UtilityFn& u) {
  const std::size_t n = Y.size();
  auto phi = [&](double s) {
    double v = s;
    for (std::size_t w = 0; w < n; ++w)
      if (q[w] != 0.0) v -= q[w] * u(Y[w] + s);
    return v;
  };
  auto slope = [&](double s) {
    double v = 1.0;
    for (std::size_t w = 0; w < n; ++w)
      if (q[w] != 0.0) v -= q[w] * u.right_derivative(Y[w] + s);
    return v;
  };
  double ymax = 0.0;
  for (double y : Y) ymax = std::max(ymax, std::abs(y));
  const double cap = 1e7 * (1.0 + ymax);
  Inner1D out;
  double lo = -ymax - 1.0, hi = ymax + 1.0 + u.parameter();
  while (slope(lo) >= 0.0) {
    if (lo < -cap) {
      // Flat towards -inf (slope exactly zero beyond all kinks) or unbounded.
      out.s = lo;
      out.value = phi(lo);
      out.unbounded = slope(lo) > 1e-9;
      if (out.unbounded) out.value = kNegInf;
      return out;
    }
    hi = lo;
    lo *= 4.0;
  }
  while (slope(hi) < 0.0) {
    if (hi > cap) {
      out.s = hi;
      out.value = phi(hi);
      out.unbounded = slope(hi) < -1e-9;
      if (out.unbounded) out.value = kNegInf;
      return out;
    }
    lo = hi;
    hi *= 4.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (slope(mid) >= 0.0 ? hi : lo) = mid;
  }
  out.s = hi;
  out.value = std::min(phi(hi), phi(lo));
  if (phi(lo) < phi(hi)) out.s = lo;
  return out;
}

struct InnerAllocation {
  double value = 0.0;
  std::vector<double> m;
  bool unbounded = false;
};

// inf_m  sum m - E[W Lambda(X + m)], decomposed into 1-D problems.
InnerAllocation inner_allocation(const RandomVector& X, const AggregationSpec& agg,
                                 std::span<const double> W, const ScenarioSpace& space) {
  const std::size_t d = X.rows(), n = X.cols();
  std::vector<double> q(n);
  for (std::size_t w = 0; w < n; ++w) q[w] = space.prob(w) * std::max(W[w], 0.0);
  InnerAllocation out;
  out.m.assign(d, 0.0);
  if (agg.acts_on_total()) {
    std::vector<double> S(n, 0.0);
    for (std::size_t w = 0; w < n; ++w)
      for (std::size_t i = 0; i < d; ++i) S[w] += X(i, w);
    const Inner1D r = minimize_allocation_1d(S, q, agg.parts()[0]);
    std::fill(out.m.begin(), out.m.end(), r.s / double(d));
    out.value = r.value;
    out.unbounded = r.unbounded;
    return out;
  }
  for (std::size_t i = 0; i < d; ++i) {
    const Inner1D r = minimize_allocation_1d(X.row(i), q, agg.parts()[i]);
    out.m[i] = r.s;
    out.unbounded = out.unbounded || r.unbounded;
    out.value += r.value;
  }
  if (out.unbounded) out.value = kNegInf;
  return out;
}

// Z(w) = W(w) * grad Lambda(X(w) + m), mixing one-sided derivatives at kinks so
// that E[Z_i] = 1 where possible.
DualVector densities_from_allocation(const RandomVector& X, const AggregationSpec& agg,
                                     std::span<const double> W, std::span<const double> m,
                                     const ScenarioSpace& space) {
  const std::size_t d = X.rows(), n = X.cols();
  DualVector Z = DualVector::zeros(d, n);
  auto mix = [&](std::span<const double> Y, double s, const UtilityFn& u, std::vector<double>& g) {
    std::vector<double> gp(n), gm(n);
    double A = 0.0, B = 0.0;
    // The bisection leaves s within rounding of a kink; look a hair to each side.
    const double h = 1e-9 * (1.0 + std::abs(s));
    for (std::size_t w = 0; w < n; ++w) {
      gp[w] = u.right_derivative(Y[w] + s + h);
      gm[w] = u.left_derivative(Y[w] + s - h);
      A += space.prob(w) * W[w] * gp[w];
      B += space.prob(w) * W[w] * gm[w];
    }
    g.assign(n, 0.0);
    if (B - A > 1e-12) {
      const double k = std::clamp((1.0 - A) / (B - A), 0.0, 1.0);
      for (std::size_t w = 0; w < n; ++w) g[w] = gp[w] + k * (gm[w] - gp[w]);
    } else {
      for (std::size_t w = 0; w < n; ++w) g[w] = A > 0.0 ? gp[w] / A : gp[w];
    }
  };
  std::vector<double> g;
  if (agg.acts_on_total()) {
    std::vector<double> S(n, 0.0);
    for (std::size_t w = 0; w < n; ++w)
      for (std::size_t i = 0; i < d; ++i) S[w] += X(i, w);
    mix(S, std::accumulate(m.begin(), m.end(), 0.0), agg.parts()[0], g);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t w = 0; w < n; ++w) Z(i, w) = W[w] * g[w];
  } else {
    for (std::size_t i = 0; i < d; ++i) {
      mix(X.row(i), m[i], agg.parts()[i], g);
      for (std::size_t w = 0; w < n; ++w) Z(i, w) = W[w] * g[w];
    }
  }
  return Z;
}

}  // namespace

SupportResult support_systemic(const DualVector& Z, const AggregationSpec& agg,
                               const AcceptanceSpec& acc, const ScenarioSpace& space,
                               const SolverOptions& opt) {
  check_Z(Z, agg, space);
  acc.check_against(space);
  SupportResult out;
  if (has_negative(Z)) {
    // Raising a position where Z < 0 stays acceptable and lowers the pairing.
    out.value = out.lower_bound = out.upper_bound = kNegInf;
    out.status = DualStatus::unbounded;
    return out;
  }
  const std::size_t d = Z.rows(), n = Z.cols(), k = d * n;
  std::vector<double> U(n), gU(n), x(d), g(d);
  ConvexProgram prog;
  prog.cost.resize(k);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t w = 0; w < n; ++w) prog.cost[i * n + w] = space.prob(w) * Z(i, w);
  prog.start.assign(k, 0.0);
  prog.restore.assign(k, 1.0);
  prog.constraint = [&](std::span<const double> y, std::span<double> grad) {
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t i = 0; i < d; ++i) x[i] = y[i * n + w];
      U[w] = agg(x);
    }
    const double v = acceptance_violation(acc, U, space, gU);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t w = 0; w < n; ++w) {
      if (gU[w] == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) x[i] = y[i * n + w];
      agg.supergradient(x, g);
      for (std::size_t i = 0; i < d; ++i) grad[i * n + w] = gU[w] * g[i];
    }
    return v;
  };
  CuttingPlaneOptions cpo;
  cpo.tol = std::min(opt.tol, 1e-8);
  cpo.max_iter = opt.max_iter;
  cpo.initial_radius = 10.0;
  const CuttingPlaneResult cp = minimize_over_convex_set(prog, cpo);
  out.lower_bound = cp.lower;
  out.upper_bound = cp.upper;
  switch (cp.status) {
    case CuttingPlaneStatus::optimal: out.value = cp.upper; break;
    case CuttingPlaneStatus::unbounded: {
      std::vector<double> probe(k), scratch(k);
      bool confirmed = true;
      // Along a recession direction the violation stays bounded while the point
      // runs off, so compare it with the distance travelled.
      double reach = 0.0;
      for (double v : cp.best) reach = std::max(reach, std::abs(v));
      for (double t : {2.0, 8.0}) {
        for (std::size_t j = 0; j < k; ++j) probe[j] = t * cp.best[j];
        confirmed = confirmed && prog.constraint(probe, scratch) <= 1e-9 + 1e-7 * t * reach;
      }
      out.status = confirmed ? DualStatus::unbounded : DualStatus::indeterminate;
      out.value = confirmed ? kNegInf : cp.upper;
      if (confirmed) out.lower_bound = out.upper_bound = kNegInf;
      break;
    }
    default:
      out.status = DualStatus::indeterminate;
      out.value = cp.upper;
      break;
  }
  return out;
}

PenaltyEval alpha(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                  const ScenarioSpace& space, bool strict_positive, const SolverOptions& opt) {
  return penalty(Z, agg, acc, space, strict_positive, false, opt);
}

PenaltyEval alpha_tilde(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                        const ScenarioSpace& space, bool strict_positive,
                        const SolverOptions& opt) {
  return penalty(Z, agg, acc, space, strict_positive, true, opt);
}

DualityReport dual_rho(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                       const ScenarioSpace& space, const SolverOptions& opt) {
  require_builtin(agg);
  DualityReport rep;
  rep.mode = DualMode::rho;
  rep.primal = rho(X, agg, acc, space, opt);
  const PrimalResult at_zero = rho(RandomVector::zeros(X.rows(), X.cols()), agg, acc, space, opt);
  if (at_zero.value == kNegInf) {
    rep.degenerate = true;
    rep.note = "rho(0) = -inf: not proper, no dual value claimed";
    return rep;
  }
  const std::size_t n = space.size();
  const BarrierParameterization bp = barrier_parameterization(acc, space);

  // Range of E[W] for which the inner allocation problem is bounded.
  double mass_lo = 0.0, mass_hi = kInf;
  for (const auto& u : agg.parts()) {
    const double up = u.slope_at_plus_inf(), dn = u.slope_at_minus_inf();
    if (up > 0.0) mass_hi = std::min(mass_hi, 1.0 / up);
    if (std::isfinite(dn)) mass_lo = std::max(mass_lo, 1.0 / dn);
  }
  if (mass_lo == 0.0) mass_lo = 1e-6;

  HypographProgram prog;
  prog.lin = bp.sigma;
  prog.lower.assign(bp.dim, 0.0);
  prog.upper.assign(bp.dim, kInf);
  prog.rows = bp.rows;
  LinearConstraint mass = normalization_row(bp, space);
  mass.sense = RowSense::greater_equal;
  mass.rhs = mass_lo;
  prog.rows.push_back(mass);
  if (std::isfinite(mass_hi)) {
    mass.sense = RowSense::less_equal;
    mass.rhs = mass_hi;
    prog.rows.push_back(mass);
  }
  prog.center.assign(bp.dim, 1.0);
  prog.weights = {1.0};
  std::vector<double> U(n), x(X.rows());
  auto cut_from = [&](const std::vector<double>& m, double value) {
    TermCut c{value, std::vector<double>(bp.dim, 0.0), std::accumulate(m.begin(), m.end(), 0.0)};
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t i = 0; i < X.rows(); ++i) x[i] = X(i, w) + m[i];
      const double l = agg(x);
      for (std::size_t j = 0; j < bp.dim; ++j) c.a[j] -= space.prob(w) * l * bp.M[w][j];
    }
    return c;
  };
  prog.term = [&](std::size_t, std::span<const double> theta) {
    const std::vector<double> W = bp.density(theta);
    const InnerAllocation ia = inner_allocation(X, agg, W, space);
    return cut_from(ia.m, ia.unbounded ? kNegInf : ia.value);
  };
  prog.initial_cuts.resize(1);
  if (rep.primal.m_star) prog.initial_cuts[0].push_back(cut_from(*rep.primal.m_star, 0.0));
  prog.initial_cuts[0].push_back(cut_from(std::vector<double>(X.rows(), 0.0), 0.0));

  CuttingPlaneOptions cpo;
  cpo.tol = std::min(opt.tol, 1e-7);
  cpo.max_iter = std::min<std::size_t>(opt.max_iter, 5000);
  const CuttingPlaneResult cp = maximize_hypograph(prog, cpo);
  if (cp.best.empty() || cp.lower == kNegInf) {
    rep.note = "dual ascent found no finite point";
    rep.dual_value = kNegInf;
    fill_gaps(rep);
    return rep;
  }
  if (cp.status != CuttingPlaneStatus::optimal) rep.note = "dual ascent stopped at the iteration limit";
  const std::vector<double> W = bp.density(cp.best);
  const InnerAllocation ia = inner_allocation(X, agg, W, space);
  DualVector Z = densities_from_allocation(X, agg, W, ia.m, space);
  const double pair = pairing(X, Z, space);
  const double by_alpha = honest_penalty(Z, agg, acc, space, W) - pair;
  rep.alpha_route = by_alpha;
  double best = std::isfinite(by_alpha) ? by_alpha : cp.lower;
  if (agg.positively_homogeneous() || space.size() * agg.dimension() <= 8) {
    SolverOptions so = opt;
    so.max_iter = std::min<std::size_t>(opt.max_iter, 2000);
    const SupportResult sig = support_systemic(Z, agg, acc, space, so);
    if (sig.status == DualStatus::optimal) {
      const double certified = std::min(sig.lower_bound, sig.upper_bound);
      rep.sigma_route = certified - pair;
      // sigma >= alpha always; only a certified lower bound may raise the dual value.
      if (in_dual_simplex(Z, space, 1e-9)) best = std::max(best, certified - pair);
    }
  }
  rep.dual_value = best;
  rep.Z_star = std::move(Z);
  rep.W_star = RandomVariable(W);
  fill_gaps(rep);
  return rep;
}

DualityReport dual_rho_tilde(const RandomVector& X, const AggregationSpec& agg,
                             const AcceptanceSpec& acc, const ScenarioSpace& space,
                             const SolverOptions& opt) {
  require_builtin(agg);
  DualityReport rep;
  rep.mode = DualMode::rho_tilde;
  rep.primal = rho_tilde(X, agg, acc, space, opt);
  if (rho_A(acc, RandomVariable::constant(space.size(), 0.0), space) == kNegInf) {
    rep.degenerate = true;
    rep.note = "rho_tilde(0) = -inf: not proper, no dual value claimed";
    return rep;
  }
  const std::size_t n = space.size(), d = X.rows();
  const BarrierParameterization bp = barrier_parameterization(acc, space);
  const RandomVariable L = eval_vector(agg, X);
  // sup over E[W] = 1 of sigma_A(W) - E[W Lambda(X)] is a linear program in theta.
  LpProblem lp;
  lp.cost.assign(bp.dim, 0.0);
  for (std::size_t j = 0; j < bp.dim; ++j) {
    lp.cost[j] = -bp.sigma[j];
    for (std::size_t w = 0; w < n; ++w) lp.cost[j] += space.prob(w) * L[w] * bp.M[w][j];
  }
  for (const auto& r : bp.rows) lp.add_row(r.coeffs, r.sense, r.rhs);
  const LinearConstraint norm = normalization_row(bp, space);
  lp.add_row(norm.coeffs, norm.sense, norm.rhs);
  const LpSolution sol = solve_lp(lp, PivotRule::bland);
  if (sol.status == LpStatus::infeasible) {
    rep.dual_value = kNegInf;
    rep.note = "no normalized barrier direction";
    fill_gaps(rep);
    return rep;
  }
  if (sol.status != LpStatus::optimal) throw SolverError("rho_tilde dual LP failed");
  const std::vector<double> W = bp.density(sol.x);
  DualVector Z = DualVector::zeros(d, n);
  std::vector<double> g(d);
  for (std::size_t w = 0; w < n; ++w) {
    agg.supergradient(X.column(w), g);
    for (std::size_t i = 0; i < d; ++i) Z(i, w) = W[w] * g[i];
  }
  const double by_alpha = honest_penalty(Z, agg, acc, space, W) - pairing(X, Z, space);
  rep.alpha_route = by_alpha;
  rep.dual_value = std::isfinite(by_alpha) ? by_alpha : -sol.objective;
  rep.Z_star = std::move(Z);
  rep.W_star = RandomVariable(W);
  fill_gaps(rep);
  return rep;
}

MinimaxReport minimax_check(const DualVector& Z, const AggregationSpec& agg,
                            const AcceptanceSpec& acc, const ScenarioSpace& space,
                            std::size_t points_per_dim, double box) {
  const oracle::SaddleValues s = oracle::saddle_grid(Z, agg, acc, space, points_per_dim, box);
  MinimaxReport rep;
  rep.inf_sup = s.inf_sup;
  rep.sup_inf = s.sup_inf;
  rep.inf_sup_unbounded = s.inf_sup_unbounded;
  rep.sup_inf_unbounded = s.sup_inf_unbounded;
  rep.discrepancy = s.discrepancy();
  rep.resolution = s.resolution;
  return rep;
}

bool conic_membership_D(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                        const ScenarioSpace& space) {
  require_builtin(agg);
  if (!agg.positively_homogeneous() || !acc.is_cone())
    throw std::invalid_argument("conic_membership_D needs a homogeneous aggregation and a conic acceptance set");
  check_Z(Z, agg, space);
  if (has_negative(Z)) return false;
  const BarrierParameterization bp = barrier_parameterization(acc, space);
  std::vector<LinearConstraint> rows = bp.rows;
  if (!domain_rows(Z, agg, bp, rows)) return false;
  LpProblem lp;
  lp.cost.assign(bp.dim, 0.0);
  lp.rows = rows;
  return solve_lp(lp, PivotRule::bland).status == LpStatus::optimal;
}

}  // namespace sysrisk
