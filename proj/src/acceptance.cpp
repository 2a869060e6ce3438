#include "sysrisk/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sysrisk/scalar.hpp"

namespace sysrisk {

namespace {

std::vector<std::size_t> ascending_order(std::span<const double> U) {
  std::vector<std::size_t> idx(U.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return U[a] < U[b]; });
  return idx;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("ES/VaR level must lie in (0,1)");
}

}  // namespace

AcceptanceSpec AcceptanceSpec::nonnegative() { return AcceptanceSpec(); }

AcceptanceSpec AcceptanceSpec::expectation_floor(double u0) {
  // 0 must be acceptable.
  if (!std::isfinite(u0) || u0 > 0.0) throw ValidationError("expectation_floor needs u0 <= 0");
  AcceptanceSpec a;
  a.kind_ = Kind::expectation_floor;
  a.param_ = u0;
  return a;
}

AcceptanceSpec AcceptanceSpec::expected_shortfall(double level) {
  check_level(level);
  AcceptanceSpec a;
  a.kind_ = Kind::expected_shortfall;
  a.param_ = level;
  return a;
}

AcceptanceSpec AcceptanceSpec::polyhedral(std::vector<RandomVariable> densities,
                                          std::vector<double> bounds) {
  if (densities.empty() || densities.size() != bounds.size())
    throw ValidationError("polyhedral acceptance needs matching densities and bounds");
  for (const auto& W : densities) {
    if (W.size() != densities.front().size()) throw DimensionError("polyhedral densities differ in length");
    if (essential_inf(W) < 0.0) throw ValidationError("polyhedral densities must be nonnegative");
  }
  for (double a : bounds)
    if (!std::isfinite(a) || a > 0.0) throw ValidationError("polyhedral bounds must be <= 0 so that 0 is acceptable");
  AcceptanceSpec s;
  s.kind_ = Kind::polyhedral;
  s.densities_ = std::move(densities);
  s.bounds_ = std::move(bounds);
  return s;
}

std::string AcceptanceSpec::kind_name() const {
  switch (kind_) {
    case Kind::nonnegative: return "nonnegative";
    case Kind::expectation_floor: return "expectation_floor";
    case Kind::expected_shortfall: return "expected_shortfall";
    case Kind::polyhedral: return "polyhedral";
  }
  return "?";
}

bool AcceptanceSpec::is_cone() const {
  switch (kind_) {
    case Kind::nonnegative:
    case Kind::expected_shortfall: return true;
    case Kind::expectation_floor: return param_ == 0.0;
    case Kind::polyhedral:
      return std::all_of(bounds_.begin(), bounds_.end(), [](double a) { return a == 0.0; });
  }
  return false;
}

void AcceptanceSpec::check_against(const ScenarioSpace& space) const {
  for (const auto& W : densities_) check_dimensions(W, space);
}

double var_level(const RandomVariable& U, double level, const ScenarioSpace& space) {
  check_level(level);
  check_dimensions(U, space);
  const auto idx = ascending_order(U.values());
  double F = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    F += space.prob(idx[j]);
    // P(U + m < 0) <= level fails once the next-worst atom must be covered.
    if (F > level + 1e-12) return -U[idx[j]];
  }
  return -U[idx.back()];
}

std::vector<double> es_density(std::span<const double> U, double level, const ScenarioSpace& space) {
  check_level(level);
  const auto idx = ascending_order(U);
  std::vector<double> W(U.size(), 0.0);
  double mass = 0.0;
  for (std::size_t j : idx) {
    const double take = std::min(space.prob(j), level - mass);
    if (take <= 0.0) break;
    W[j] = take / (level * space.prob(j));
    mass += take;
  }
  return W;
}

double es_level(const RandomVariable& U, double level, const ScenarioSpace& space) {
  check_dimensions(U, space);
  const auto W = es_density(U.values(), level, space);
  double s = 0.0;
  for (std::size_t w = 0; w < U.size(); ++w) s -= space.prob(w) * W[w] * U[w];
  return s;
}

double acceptance_violation(const AcceptanceSpec& acc, std::span<const double> U,
                            const ScenarioSpace& space, std::span<double> grad) {
  const std::size_t n = space.size();
  std::fill(grad.begin(), grad.end(), 0.0);
  switch (acc.kind()) {
    case AcceptanceSpec::Kind::nonnegative: {
      const std::size_t w = std::min_element(U.begin(), U.end()) - U.begin();
      grad[w] = -1.0;
      return -U[w];
    }
    case AcceptanceSpec::Kind::expectation_floor: {
      for (std::size_t w = 0; w < n; ++w) grad[w] = -space.prob(w);
      return acc.floor() - space.expectation(U);
    }
    case AcceptanceSpec::Kind::expected_shortfall: {
      const auto W = es_density(U, acc.level(), space);
      double s = 0.0;
      for (std::size_t w = 0; w < n; ++w) {
        grad[w] = -space.prob(w) * W[w];
        s += grad[w] * U[w];
      }
      return s;
    }
    case AcceptanceSpec::Kind::polyhedral: {
      double worst = kNegInf;
      std::size_t arg = 0;
      for (std::size_t k = 0; k < acc.densities().size(); ++k) {
        const auto& Wk = acc.densities()[k].values();
        const double mass = space.expectation(Wk);
        if (mass <= 0.0) continue;  // 0 >= a_k always holds
        double e = 0.0;
        for (std::size_t w = 0; w < n; ++w) e += space.prob(w) * Wk[w] * U[w];
        const double v = (acc.bounds()[k] - e) / mass;
        if (v > worst) {
          worst = v;
          arg = k;
        }
      }
      if (worst == kNegInf) return -1.0;
      const auto& Wk = acc.densities()[arg].values();
      const double mass = space.expectation(Wk);
      for (std::size_t w = 0; w < n; ++w) grad[w] = -space.prob(w) * Wk[w] / mass;
      return worst;
    }
  }
  return 0.0;
}

bool contains(const AcceptanceSpec& acc, const RandomVariable& U, const ScenarioSpace& space,
              double tol) {
  check_dimensions(U, space);
  switch (acc.kind()) {
    case AcceptanceSpec::Kind::nonnegative: return essential_inf(U) >= -tol;
    case AcceptanceSpec::Kind::expectation_floor: return space.expectation(U.values()) >= acc.floor() - tol;
    case AcceptanceSpec::Kind::expected_shortfall: return es_level(U, acc.level(), space) <= tol;
    case AcceptanceSpec::Kind::polyhedral:
      for (std::size_t k = 0; k < acc.densities().size(); ++k) {
        double e = 0.0;
        for (std::size_t w = 0; w < U.size(); ++w) e += space.prob(w) * acc.densities()[k][w] * U[w];
        if (e < acc.bounds()[k] - tol) return false;
      }
      return true;
  }
  return false;
}

double support_function(const AcceptanceSpec& acc, const RandomVariable& W,
                        const ScenarioSpace& space, double tol) {
  check_dimensions(W, space);
  const std::size_t n = space.size();
  switch (acc.kind()) {
    case AcceptanceSpec::Kind::nonnegative: return essential_inf(W) >= -tol ? 0.0 : kNegInf;
    case AcceptanceSpec::Kind::expectation_floor: {
      const double mean = space.expectation(W.values());
      if (mean < -tol) return kNegInf;
      for (double v : W.values())
        if (std::abs(v - mean) > 1e-9 * std::max(std::abs(mean), 1.0)) return kNegInf;
      return std::max(mean, 0.0) * acc.floor();
    }
    case AcceptanceSpec::Kind::expected_shortfall: {
      const double bound = space.expectation(W.values()) / acc.level();
      for (double v : W.values())
        if (v < -tol || v > bound + tol * std::max(1.0, bound)) return kNegInf;
      return 0.0;
    }
    case AcceptanceSpec::Kind::polyhedral: {
      // inf E[U W] s.t. E[U W_k] >= a_k, with U = U+ - U-.
      LpProblem lp;
      lp.cost.resize(2 * n);
      for (std::size_t w = 0; w < n; ++w) {
        lp.cost[w] = space.prob(w) * W[w];
        lp.cost[n + w] = -space.prob(w) * W[w];
      }
      for (std::size_t k = 0; k < acc.densities().size(); ++k) {
        std::vector<double> row(2 * n);
        for (std::size_t w = 0; w < n; ++w) {
          row[w] = space.prob(w) * acc.densities()[k][w];
          row[n + w] = -row[w];
        }
        lp.add_row(std::move(row), RowSense::greater_equal, acc.bounds()[k]);
      }
      const LpSolution sol = solve_lp(lp, PivotRule::bland);
      if (sol.status == LpStatus::unbounded) return kNegInf;
      if (sol.status != LpStatus::optimal)
        throw SolverError("polyhedral support function: LP did not reach optimality");
      return sol.objective;
    }
  }
  return kNegInf;
}

bool in_barrier_cone(const AcceptanceSpec& acc, const RandomVariable& W, const ScenarioSpace& space,
                     double tol) {
  return support_function(acc, W, space, tol) > kNegInf;
}

double rho_A(const AcceptanceSpec& acc, const RandomVariable& U, const ScenarioSpace& space,
             double tol) {
  check_dimensions(U, space);
  std::vector<double> shifted(U.size()), grad(U.size());
  auto accepted = [&](double m) {
    for (std::size_t w = 0; w < U.size(); ++w) shifted[w] = U[w] + m;
    return acceptance_violation(acc, shifted, space, grad) <= 0.0;
  };
  const double hi = -essential_inf(U);
  const double lo = -essential_sup(U) - (essential_sup(U) - essential_inf(U)) - 1.0;
  return threshold_bisection(accepted, lo, hi, tol, kUnboundedCap, 1e9);
}

std::vector<double> BarrierParameterization::density(std::span<const double> theta) const {
  std::vector<double> W(M.size(), 0.0);
  for (std::size_t w = 0; w < M.size(); ++w)
    for (std::size_t j = 0; j < dim; ++j) W[w] += M[w][j] * theta[j];
  return W;
}

BarrierParameterization barrier_parameterization(const AcceptanceSpec& acc,
                                                 const ScenarioSpace& space) {
  const std::size_t n = space.size();
  BarrierParameterization bp;
  auto identity = [&] {
    bp.dim = n;
    bp.M.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t w = 0; w < n; ++w) bp.M[w][w] = 1.0;
    bp.sigma.assign(n, 0.0);
  };
  switch (acc.kind()) {
    case AcceptanceSpec::Kind::nonnegative: identity(); break;
    case AcceptanceSpec::Kind::expectation_floor:
      bp.dim = 1;
      bp.M.assign(n, std::vector<double>{1.0});
      bp.sigma = {acc.floor()};
      break;
    case AcceptanceSpec::Kind::expected_shortfall:
      identity();
      for (std::size_t w = 0; w < n; ++w) {
        std::vector<double> row(n);
        for (std::size_t v = 0; v < n; ++v) row[v] = -space.prob(v) / acc.level();
        row[w] += 1.0;
        bp.rows.push_back({std::move(row), RowSense::less_equal, 0.0});
      }
      break;
    case AcceptanceSpec::Kind::polyhedral:
      acc.check_against(space);
      bp.dim = acc.densities().size();
      bp.M.assign(n, std::vector<double>(bp.dim));
      for (std::size_t w = 0; w < n; ++w)
        for (std::size_t k = 0; k < bp.dim; ++k) bp.M[w][k] = acc.densities()[k][w];
      bp.sigma = acc.bounds();
      break;
  }
  return bp;
}

}  // namespace sysrisk
