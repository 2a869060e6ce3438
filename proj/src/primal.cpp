#include "sysrisk/primal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sysrisk/cutting_plane.hpp"

namespace sysrisk {

std::string to_string(PrimalStatus s) {
  switch (s) {
    case PrimalStatus::optimal: return "optimal";
    case PrimalStatus::unbounded_below: return "unbounded_below";
    case PrimalStatus::infeasible: return "infeasible";
    case PrimalStatus::tolerance_reached: return "tolerance_reached";
  }
  return "?";
}

namespace {

void check_setup(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                 const ScenarioSpace& space) {
  check_dimensions(X, space);
  if (X.rows() != agg.dimension()) throw DimensionError("positions have " + std::to_string(X.rows()) +
                                                        " rows, aggregation expects " +
                                                        std::to_string(agg.dimension()));
  acc.check_against(space);
}

}  // namespace

PrimalResult rho(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                 const ScenarioSpace& space, const SolverOptions& opt) {
  check_setup(X, agg, acc, space);
  const std::size_t d = X.rows(), n = X.cols();
  std::vector<double> U(n), gU(n), x(d), g(d);

  ConvexProgram prog;
  prog.cost.assign(d, 1.0);
  prog.restore.assign(d, 1.0);
  prog.start.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const auto row = X.row(i);
    prog.start[i] = std::max(0.0, -*std::min_element(row.begin(), row.end()));
  }
  prog.constraint = [&](std::span<const double> m, std::span<double> grad) {
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t i = 0; i < d; ++i) x[i] = X(i, w) + m[i];
      U[w] = agg(x);
    }
    const double v = acceptance_violation(acc, U, space, gU);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t w = 0; w < n; ++w) {
      if (gU[w] == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) x[i] = X(i, w) + m[i];
      agg.supergradient(x, g);
      for (std::size_t i = 0; i < d; ++i) grad[i] += gU[w] * g[i];
    }
    return v;
  };
  CuttingPlaneOptions cpo;
  cpo.tol = opt.tol;
  cpo.max_iter = opt.max_iter;
  const CuttingPlaneResult cp = minimize_over_convex_set(prog, cpo);

  PrimalResult res;
  res.iterations = cp.iterations;
  res.lower_bound = cp.lower;
  res.upper_bound = cp.upper;
  res.m_star = cp.best;
  switch (cp.status) {
    case CuttingPlaneStatus::optimal:
      res.value = cp.upper;
      res.status = PrimalStatus::optimal;
      break;
    case CuttingPlaneStatus::unbounded: {
      // Ray probe: the incumbent's direction from the start must stay feasible further out.
      std::vector<double> dir(d), probe(d), scratch(d);
      for (std::size_t i = 0; i < d; ++i) dir[i] = cp.best[i] - prog.start[i];
      bool confirmed = std::accumulate(dir.begin(), dir.end(), 0.0) < 0.0;
      for (double t : {2.0, 8.0}) {
        for (std::size_t i = 0; i < d; ++i) probe[i] = prog.start[i] + t * dir[i];
        confirmed = confirmed && prog.constraint(probe, scratch) <= 1e-9;
      }
      if (confirmed) {
        res.value = kNegInf;
        res.status = PrimalStatus::unbounded_below;
        res.m_star.reset();
      } else {
        res.value = cp.upper;
        res.status = PrimalStatus::tolerance_reached;
      }
      break;
    }
    case CuttingPlaneStatus::infeasible:
      res.value = kInf;
      res.status = PrimalStatus::infeasible;
      res.m_star.reset();
      break;
    case CuttingPlaneStatus::iteration_limit:
      res.value = cp.upper;
      res.status = PrimalStatus::tolerance_reached;
      break;
  }
  return res;
}

PrimalResult rho_tilde(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                       const ScenarioSpace& space, const SolverOptions& opt) {
  check_setup(X, agg, acc, space);
  PrimalResult res;
  res.value = rho_A(acc, eval_vector(agg, X), space, opt.tol * 1e-3);
  res.lower_bound = res.upper_bound = res.value;
  if (res.value == kNegInf) {
    res.status = PrimalStatus::unbounded_below;
  } else if (res.value == kInf) {
    res.status = PrimalStatus::infeasible;
  } else {
    res.m_star = std::vector<double>{res.value};
  }
  return res;
}

std::vector<std::vector<double>> sample_M0(std::size_t d) {
  std::vector<std::vector<double>> dirs;
  if (d < 2) return dirs;
  // Orthonormal basis of {sum m = 0} by Gram-Schmidt on e_1 - e_{k+1}.
  std::vector<std::vector<double>> basis;
  for (std::size_t k = 1; k < d; ++k) {
    std::vector<double> v(d, 0.0);
    v[0] = 1.0;
    v[k] = -1.0;
    for (const auto& b : basis) {
      const double c = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
      for (std::size_t i = 0; i < d; ++i) v[i] -= c * b[i];
    }
    const double nrm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (double& x : v) x /= nrm;
    basis.push_back(v);
  }
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> v(d);
      for (std::size_t i = 0; i < d; ++i) v[i] = s * basis[a][i];
      dirs.push_back(v);
    }
    for (std::size_t b = a + 1; b < basis.size(); ++b) {
      for (int k = 0; k < 24; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 24.0;
        std::vector<double> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = std::cos(th) * basis[a][i] + std::sin(th) * basis[b][i];
        dirs.push_back(v);
      }
    }
  }
  std::vector<std::vector<double>> pts;
  for (double r : {0.1, 1.0, 10.0, 100.0})
    for (const auto& v : dirs) {
      std::vector<double> p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = r * v[i];
      pts.push_back(p);
    }
  return pts;
}

Diagnostics diagnostics(const RandomVector& X_probe, const AggregationSpec& agg,
                        const AcceptanceSpec& acc, const ScenarioSpace& space,
                        const SolverOptions& opt) {
  check_setup(X_probe, agg, acc, space);
  const std::size_t d = agg.dimension(), n = space.size();
  Diagnostics diag;
  const PrimalResult r0 = rho(RandomVector::zeros(d, n), agg, acc, space, opt);
  diag.rho_at_zero = r0.value;
  diag.proper = r0.value > kNegInf;

  diag.M0_intersection_trivial = true;
  bool lambda_negative = true;
  for (const auto& m : sample_M0(d)) {
    const double v = agg(m);
    if (contains(acc, RandomVariable::constant(n, v), space)) diag.M0_intersection_trivial = false;
    if (!(v < 0.0)) lambda_negative = false;
  }
  bool no_negative_constant = true;
  for (double c : {1e-6, 1e-3, 0.1, 1.0, 10.0, 100.0, 1e4})
    if (contains(acc, RandomVariable::constant(n, -c), space, 0.0)) no_negative_constant = false;
  diag.negative_constants_rejected = no_negative_constant && lambda_negative;

  const auto grid = default_admissibility_grid(d);
  diag.affine_dominance_ok =
      agg.affine_dominance().has_value() && verify_affine_dominance(agg, *agg.affine_dominance(), grid);

  std::vector<double> grad(n);
  for (double c : {1.0, 10.0, 100.0}) {
    RandomVector Xc(d, n, std::vector<double>(d * n, c));
    const RandomVariable U = eval_vector(agg, Xc);
    if (acceptance_violation(acc, U.values(), space, grad) < -1e-9) {
      diag.interior_point_found = Xc;
      break;
    }
  }
  return diag;
}

}  // namespace sysrisk
