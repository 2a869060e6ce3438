#include "sysrisk/shortfall.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sysrisk/scalar.hpp"

namespace sysrisk {

namespace {

constexpr double kLambdaMin = 1e-6;
constexpr double kLambdaMax = 1e6;

// Euclidean projection onto { r >= 0, sum r = 1 }.
std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / double(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

struct Inner {
  double value = kNegInf;
  double lambda = 1.0;
};

// sup over lambda of the dual objective at fixed q, restricted to lambda q in dom u*.
Inner best_lambda(const RandomVariable& X, const ShortfallSpec& spec, const ScenarioSpace& space,
                  std::span<const double> q) {
  const Interval dom = spec.utility().conjugate_domain();
  const double qmax = *std::max_element(q.begin(), q.end());
  const double qmin = *std::min_element(q.begin(), q.end());
  double lo = kLambdaMin, hi = kLambdaMax;
  if (dom.lo > 0.0) {
    if (qmin <= 0.0) return {};
    lo = std::max(lo, dom.lo / qmin);
  }
  if (std::isfinite(dom.hi) && qmax > 0.0) hi = std::min(hi, dom.hi / qmax);
  if (lo > hi * (1.0 + 1e-12)) return {};
  if (hi <= lo * (1.0 + 1e-12)) return {shortfall_dual_objective(X, spec, space, q, lo), lo};
  auto f = [&](double t) { return shortfall_dual_objective(X, spec, space, q, std::exp(t)); };
  const ScalarOptimum opt = scan_then_golden_max(f, std::log(lo), std::log(hi), 81, false, 1e-12);
  return {opt.value, std::exp(opt.x)};
}

struct Ascent {
  double value = kNegInf;
  std::vector<double> q;
  double lambda = 1.0;
  std::size_t iterations = 0;
};

Ascent projected_ascent(const RandomVariable& X, const ShortfallSpec& spec,
                        const ScenarioSpace& space, std::vector<double> r, double tol,
                        std::size_t max_iter) {
  const std::size_t n = space.size();
  auto density = [&](const std::vector<double>& rr) {
    std::vector<double> q(n);
    for (std::size_t w = 0; w < n; ++w) q[w] = rr[w] / space.prob(w);
    return q;
  };
  Ascent a;
  a.q = density(r);
  Inner cur = best_lambda(X, spec, space, a.q);
  double step = 1.0;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    // Envelope gradient in r: -X + (u*)'(lambda q), and (u*)' is the conjugate argmin.
    std::vector<double> g(n);
    for (std::size_t w = 0; w < n; ++w)
      g[w] = -X[w] + spec.utility().conjugate_argmin(cur.lambda * a.q[w], 0.0);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<double> trial(n);
      for (std::size_t w = 0; w < n; ++w) trial[w] = r[w] + step * g[w];
      trial = project_simplex(std::move(trial));
      const std::vector<double> qt = density(trial);
      const Inner next = best_lambda(X, spec, space, qt);
      double move = 0.0;
      for (std::size_t w = 0; w < n; ++w) move += (trial[w] - r[w]) * g[w];
      if (next.value >= cur.value + 1e-4 * move && next.value > cur.value - 1e-15) {
        const bool tiny = next.value - cur.value <= tol * 1e-3 * (1.0 + std::abs(cur.value));
        r = trial;
        a.q = qt;
        cur = next;
        moved = !tiny;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  a.value = cur.value;
  a.lambda = cur.lambda;
  a.iterations = it;
  return a;
}

}  // namespace

ShortfallSpec::ShortfallSpec(UtilityFn u, double u0) : u_(u), u0_(u0) {
  if (!std::isfinite(u0)) throw ValidationError("shortfall: u0 must be finite");
  for (int k = -10; k <= 60; ++k)
    if (u_(std::ldexp(1.0, k)) > u0) return;
  throw ValidationError("shortfall: u(x) > u0 fails on every probed x");
}

double expected_utility(const RandomVariable& X, double m, const UtilityFn& u,
                        const ScenarioSpace& space) {
  double e = 0.0;
  for (std::size_t w = 0; w < X.size(); ++w) e += space.prob(w) * u(X[w] + m);
  return e;
}

PrimalResult rho_u_primal(const RandomVariable& X, const ShortfallSpec& spec,
                          const ScenarioSpace& space, double tol) {
  check_dimensions(X, space);
  auto ok = [&](double m) { return expected_utility(X, m, spec.utility(), space) >= spec.u0(); };
  PrimalResult r;
  r.value = threshold_bisection(ok, -essential_sup(X), -essential_inf(X) + 1.0, tol, kUnboundedCap,
                                1e9);
  r.lower_bound = r.upper_bound = r.value;
  if (std::isfinite(r.value)) {
    r.m_star = std::vector<double>{r.value};
    r.lower_bound = r.value - tol;
  } else {
    r.status = r.value < 0 ? PrimalStatus::unbounded_below : PrimalStatus::infeasible;
  }
  return r;
}

double shortfall_dual_objective(const RandomVariable& X, const ShortfallSpec& spec,
                                const ScenarioSpace& space, std::span<const double> q,
                                double lambda) {
  double v = spec.u0() / lambda;
  for (std::size_t w = 0; w < X.size(); ++w) {
    const double c = spec.utility().conjugate(lambda * q[w], 0.0);
    if (!std::isfinite(c)) return kNegInf;
    v += space.prob(w) * (-X[w] * q[w] + c / lambda);
  }
  return v;
}

DualityReport rho_u_dual(const RandomVariable& X, const ShortfallSpec& spec,
                         const ScenarioSpace& space, const ShortfallOptions& opt) {
  check_dimensions(X, space);
  const std::size_t n = space.size();
  DualityReport rep;
  rep.mode = DualMode::shortfall;
  rep.primal = rho_u_primal(X, spec, space, std::min(opt.tol, 1e-9));

  Ascent best;
  if (spec.utility().kind() == UtilityFn::Kind::linear) {
    // u* is finite only at 1, so lambda q = 1 forces q = 1 and lambda = 1.
    best.q.assign(n, 1.0);
    best.lambda = 1.0;
    best.value = shortfall_dual_objective(X, spec, space, best.q, 1.0);
  } else {
    const std::size_t restarts = std::max<std::size_t>(opt.restarts, 1);
    std::vector<std::vector<double>> starts(restarts);
    starts[0].assign(space.probs().begin(), space.probs().end());
    std::mt19937_64 rng(opt.seed);
    std::exponential_distribution<double> expo(1.0);
    for (std::size_t k = 1; k < restarts; ++k) {
      std::vector<double> r(n);
      double s = 0.0;
      for (double& x : r) s += (x = expo(rng));
      for (double& x : r) x /= s;
      starts[k] = r;
    }
    // First-order conditions at the primal solution: dQ/dP proportional to u'(X + m*).
    if (rep.primal.m_star) {
      const double m = rep.primal.value;
      std::vector<double> r(n);
      double s = 0.0;
      for (std::size_t w = 0; w < n; ++w) {
        const double g = 0.5 * (spec.utility().left_derivative(X[w] + m) +
                                spec.utility().right_derivative(X[w] + m));
        s += (r[w] = space.prob(w) * g);
      }
      if (s > 0.0 && std::isfinite(s)) {
        for (double& x : r) x /= s;
        starts.push_back(std::move(r));
      }
    }
    std::vector<Ascent> runs(starts.size());
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < starts.size(); ++k)
      runs[k] = projected_ascent(X, spec, space, starts[k], opt.tol, opt.max_iter);
    best = runs[0];
    for (std::size_t k = 1; k < runs.size(); ++k)
      if (runs[k].value > best.value) best = runs[k];
    rep.primal.iterations = best.iterations;
  }

  if (!std::isfinite(best.value)) {
    rep.degenerate = true;
    rep.note = "no dual-feasible density found";
  }
  rep.dual_value = best.value;
  rep.Z_star = DualVector(1, n, best.q);
  rep.W_star = RandomVariable::constant(n, 1.0 / best.lambda);
  fill_gaps(rep);
  return rep;
}

}  // namespace sysrisk
