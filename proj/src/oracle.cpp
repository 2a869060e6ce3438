#include "sysrisk/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sysrisk::oracle {

namespace {

double utility_ref(const UtilityFn& u, double x) {
  const double c = u.parameter();
  switch (u.kind()) {
    case UtilityFn::Kind::linear: return x;
    case UtilityFn::Kind::exponential: return 1.0 - std::exp(-c * x);
    case UtilityFn::Kind::power: return x >= 0.0 ? x : (1.0 - std::pow(1.0 - x, c)) / c;
    case UtilityFn::Kind::linear_capped: return x < c ? x : c;
  }
  return 0.0;
}

struct Best {
  double value;
  std::size_t index;
};

// Deterministic arg-optimum over [0, count): ties go to the smallest index, so
// serial and parallel sweeps agree exactly.
template <class F>
Best sweep(std::size_t count, bool maximize, Execution exec, F&& f) {
  const double worst = maximize ? -kInf : kInf;
  auto better = [&](double v, std::size_t i, const Best& b) {
    if (maximize ? v > b.value : v < b.value) return true;
    return v == b.value && i < b.index;
  };
  Best best{worst, count};
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) {
      const double v = f(i);
      if (better(v, i, best)) best = {v, i};
    }
    return best;
  }
#pragma omp parallel
  {
    Best local{worst, count};
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < count; ++i) {
      const double v = f(i);
      if (better(v, i, local)) local = {v, i};
    }
#pragma omp critical
    {
      if (local.index < count && better(local.value, local.index, best)) best = local;
    }
  }
  return best;
}

// Decodes a flat index into per-dimension grid indices.
void decode(std::size_t flat, const std::vector<std::size_t>& radix, std::vector<std::size_t>& out) {
  for (std::size_t i = radix.size(); i-- > 0;) {
    out[i] = flat % radix[i];
    flat /= radix[i];
  }
}

std::size_t checked_product(const std::vector<std::size_t>& radix, std::size_t limit) {
  std::size_t total = 1;
  for (std::size_t r : radix) {
    if (r != 0 && total > limit / r) throw std::invalid_argument("oracle grid too large");
    total *= r;
  }
  return total;
}

std::vector<double> axis(std::size_t points, double lo, double hi) {
  std::vector<double> v(points);
  for (std::size_t k = 0; k < points; ++k) v[k] = lo + (hi - lo) * double(k) / double(points - 1);
  return v;
}

// Solves sum_k lam_k W_k = target through the normal equations. Succeeds only
// for an exact, nonnegative and unique representation.
bool represent(const AcceptanceSpec& acc, std::span<const double> target, std::vector<double>& lam) {
  const auto& D = acc.densities();
  const std::size_t K = D.size(), n = target.size();
  if (K > n) return false;
  std::vector<std::vector<double>> A(K, std::vector<double>(K + 1, 0.0));
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = 0; b < K; ++b)
      for (std::size_t w = 0; w < n; ++w) A[a][b] += D[a][w] * D[b][w];
    for (std::size_t w = 0; w < n; ++w) A[a][K] += D[a][w] * target[w];
  }
  for (std::size_t col = 0; col < K; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < K; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-12) return false;
    std::swap(A[col], A[piv]);
    for (std::size_t r = 0; r < K; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c <= K; ++c) A[r][c] -= f * A[col][c];
    }
  }
  lam.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    lam[k] = A[k][K] / A[k][k];
    if (lam[k] < -1e-12) return false;
    lam[k] = std::max(lam[k], 0.0);
  }
  for (std::size_t w = 0; w < n; ++w) {
    double v = 0.0;
    for (std::size_t k = 0; k < K; ++k) v += lam[k] * D[k][w];
    if (std::abs(v - target[w]) > 1e-9 * (1.0 + std::abs(target[w]))) return false;
  }
  return true;
}

// Candidate dual directions W with sigma_A(W), straight from the definition of each set.
struct Candidates {
  // product kinds: W(w) ranges over per-scenario lists
  std::vector<std::vector<double>> per_scenario;
  bool product = false;
  // explicit list otherwise
  std::vector<std::vector<double>> list;
  std::vector<double> sigma;
};

Candidates candidates(const DualVector& Z, const AcceptanceSpec& acc, const ScenarioSpace& space,
                      std::size_t points, double w_max) {
  const std::size_t n = space.size();
  std::vector<double> base = axis(points, 0.0, w_max);
  Candidates c;
  switch (acc.kind()) {
    case AcceptanceSpec::Kind::nonnegative:
    case AcceptanceSpec::Kind::expected_shortfall: {
      c.product = true;
      c.per_scenario.assign(n, base);
      for (std::size_t w = 0; w < n; ++w) {
        for (std::size_t i = 0; i < Z.rows(); ++i) c.per_scenario[w].push_back(Z(i, w));
        auto& l = c.per_scenario[w];
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
      }
      break;
    }
    case AcceptanceSpec::Kind::expectation_floor: {
      std::vector<double> s = base;
      for (double z : Z.flat()) s.push_back(z);
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      for (double v : s) {
        c.list.emplace_back(n, v);
        c.sigma.push_back(v * acc.floor());
      }
      break;
    }
    case AcceptanceSpec::Kind::polyhedral: {
      const std::size_t K = acc.densities().size();
      std::vector<std::size_t> radix(K, points), idx(K);
      const std::size_t total = checked_product(radix, 50000000);
      for (std::size_t f = 0; f < total; ++f) {
        decode(f, radix, idx);
        std::vector<double> W(n, 0.0);
        double sig = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const double lam = base[idx[k]];
          sig += lam * acc.bounds()[k];
          for (std::size_t w = 0; w < n; ++w) W[w] += lam * acc.densities()[k][w];
        }
        c.list.push_back(std::move(W));
        c.sigma.push_back(sig);
      }
      // Linear aggregations need W equal to a row of Z exactly; add those rows
      // when they have a nonnegative representation sum_k lam_k W_k.
      for (std::size_t i = 0; i < Z.rows(); ++i) {
        std::vector<double> lam;
        if (!represent(acc, Z.row(i), lam)) continue;
        double sig = 0.0;
        for (std::size_t k = 0; k < K; ++k) sig += lam[k] * acc.bounds()[k];
        const auto row = Z.row(i);
        c.list.emplace_back(row.begin(), row.end());
        c.sigma.push_back(sig);
      }
      break;
    }
  }
  return c;
}

bool es_barrier_ok(const std::vector<double>& W, double level, const ScenarioSpace& space) {
  double mean = 0.0;
  for (std::size_t w = 0; w < W.size(); ++w) mean += space.prob(w) * W[w];
  for (double v : W)
    if (v > mean / level + 1e-12 * (1.0 + mean)) return false;
  return true;
}

// min over the per-scenario x grid of <x, z> - w Lambda(x).
double inner_min(const AggregationSpec& agg, std::span<const double> z, double w,
                 const std::vector<double>& xs) {
  const std::size_t d = z.size();
  std::vector<std::size_t> radix(d, xs.size()), idx(d);
  const std::size_t total = checked_product(radix, 200000000);
  std::vector<double> x(d);
  double best = kInf;
  for (std::size_t f = 0; f < total; ++f) {
    decode(f, radix, idx);
    double v = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = xs[idx[i]];
      v += x[i] * z[i];
    }
    v -= w * lambda_ref(agg, x);
    best = std::min(best, v);
  }
  return best;
}

double alpha_value(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                   const ScenarioSpace& space, std::size_t points, double box, double w_max,
                   Execution exec) {
  const std::size_t n = space.size();
  const std::vector<double> xs = axis(points, -box, box);
  const Candidates c = candidates(Z, acc, space, points, w_max);
  std::vector<std::vector<double>> zc(n);
  for (std::size_t w = 0; w < n; ++w) zc[w] = Z.column(w);
  if (c.product) {
    // Tabulate the inner minimum per scenario and candidate, then enumerate products.
    std::vector<std::vector<double>> table(n);
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t w = 0; w < n; ++w) {
      table[w].resize(c.per_scenario[w].size());
      for (std::size_t k = 0; k < c.per_scenario[w].size(); ++k) jobs.push_back({w, k});
    }
    sweep(jobs.size(), true, exec, [&](std::size_t j) {
      const auto [w, k] = jobs[j];
      table[w][k] = inner_min(agg, zc[w], c.per_scenario[w][k], xs);
      return 0.0;
    });
    std::vector<std::size_t> radix(n), idx(n);
    for (std::size_t w = 0; w < n; ++w) radix[w] = c.per_scenario[w].size();
    const std::size_t total = checked_product(radix, 200000000);
    const bool es = acc.kind() == AcceptanceSpec::Kind::expected_shortfall;
    const Best b = sweep(total, true, exec, [&](std::size_t f) {
      std::vector<std::size_t> id(n);
      decode(f, radix, id);
      if (es) {
        std::vector<double> W(n);
        for (std::size_t w = 0; w < n; ++w) W[w] = c.per_scenario[w][id[w]];
        if (!es_barrier_ok(W, acc.level(), space)) return -kInf;
      }
      double v = 0.0;
      for (std::size_t w = 0; w < n; ++w) v += space.prob(w) * table[w][id[w]];
      return v;
    });
    return b.value;
  }
  const Best b = sweep(c.list.size(), true, exec, [&](std::size_t j) {
    double v = c.sigma[j];
    for (std::size_t w = 0; w < n; ++w) v += space.prob(w) * inner_min(agg, zc[w], c.list[j][w], xs);
    return v;
  });
  return b.value;
}

double inf_sup_value(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                     const ScenarioSpace& space, std::size_t points, double box, double w_max,
                     Execution exec) {
  const std::size_t n = space.size(), d = Z.rows();
  const std::vector<double> xs = axis(points, -box, box);
  const Candidates c = candidates(Z, acc, space, points, w_max);
  std::vector<std::vector<double>> Ws = c.list;
  std::vector<double> sig = c.sigma;
  if (c.product) {
    std::vector<std::size_t> radix(n), idx(n);
    for (std::size_t w = 0; w < n; ++w) radix[w] = c.per_scenario[w].size();
    const std::size_t total = checked_product(radix, 5000000);
    for (std::size_t f = 0; f < total; ++f) {
      decode(f, radix, idx);
      std::vector<double> W(n);
      for (std::size_t w = 0; w < n; ++w) W[w] = c.per_scenario[w][idx[w]];
      if (acc.kind() == AcceptanceSpec::Kind::expected_shortfall && !es_barrier_ok(W, acc.level(), space))
        continue;
      Ws.push_back(std::move(W));
      sig.push_back(0.0);
    }
  }
  std::vector<std::size_t> radix(d * n, points);
  const std::size_t total = checked_product(radix, 50000000);
  if (total > 0 && Ws.size() > 4000000000ull / total) throw std::invalid_argument("saddle grid too large");
  const Best b = sweep(total, false, exec, [&](std::size_t f) {
    std::vector<std::size_t> id(d * n);
    decode(f, radix, id);
    std::vector<double> U(n), x(d);
    double pair = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = xs[id[i * n + w]];
        pair += space.prob(w) * x[i] * Z(i, w);
      }
      U[w] = space.prob(w) * lambda_ref(agg, x);
    }
    double best = -kInf;
    for (std::size_t j = 0; j < Ws.size(); ++j) {
      double v = sig[j];
      for (std::size_t w = 0; w < n; ++w) v -= U[w] * Ws[j][w];
      best = std::max(best, v);
    }
    return pair + best;
  });
  return b.value;
}

bool looks_unbounded(double v_box, double v_double) {
  return v_double < 1.5 * std::min(v_box, 0.0) - 1e-9;
}

double default_w_max(const DualVector& Z) {
  double m = 1.0;
  for (double z : Z.flat()) m = std::max(m, z);
  return 2.0 * m;
}

}  // namespace

GridSpec GridSpec::uniform(std::size_t dims, double lo, double hi, std::size_t points) {
  GridSpec g{std::vector<double>(dims, lo), std::vector<double>(dims, hi),
             std::vector<std::size_t>(dims, points)};
  g.validate();
  return g;
}

double GridSpec::resolution() const {
  double r = 0.0;
  for (std::size_t i = 0; i < dims(); ++i) r = std::max(r, step(i));
  return r;
}

std::size_t GridSpec::size() const { return checked_product(points, 1ull << 40); }

void GridSpec::validate() const {
  if (lower.size() != points.size() || upper.size() != points.size())
    throw std::invalid_argument("grid spec: inconsistent dimensions");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] < 3) throw std::invalid_argument("grid spec: at least 3 points per dimension");
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(upper[i] > lower[i]))
      throw std::invalid_argument("grid spec: bounds must be finite and increasing");
  }
}

double lambda_ref(const AggregationSpec& agg, std::span<const double> x) {
  const auto& parts = agg.parts();
  switch (agg.kind()) {
    case AggregationSpec::Kind::sum: {
      double s = 0.0;
      for (double v : x) s += v;
      return s;
    }
    case AggregationSpec::Kind::sum_of_losses: {
      double s = 0.0;
      for (double v : x) s += v < 0.0 ? v : 0.0;
      return s;
    }
    case AggregationSpec::Kind::utility_of_sum: {
      double s = 0.0;
      for (double v : x) s += v;
      return utility_ref(parts[0], s);
    }
    case AggregationSpec::Kind::componentwise_utility: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += utility_ref(parts[i], x[i]);
      return s;
    }
    case AggregationSpec::Kind::custom: return agg(x);
  }
  return 0.0;
}

double var_ref(std::span<const double> U, double level, const ScenarioSpace& space) {
  // VaR is the least candidate m = -U(w) with P(U + m < 0) <= level.
  double best = kInf;
  for (double cand : U) {
    const double m = -cand;
    double p = 0.0;
    for (std::size_t w = 0; w < U.size(); ++w)
      if (U[w] + m < 0.0) p += space.prob(w);
    if (p <= level + 1e-12) best = std::min(best, m);
  }
  return best;
}

double es_ref(std::span<const double> U, double level, const ScenarioSpace& space) {
  double best = kInf;
  for (double cand : U) {
    const double c = -cand;
    double tail = 0.0;
    for (std::size_t w = 0; w < U.size(); ++w) tail += space.prob(w) * std::max(-U[w] - c, 0.0);
    best = std::min(best, c + tail / level);
  }
  return best;
}

double es_riemann(std::span<const double> U, double level, const ScenarioSpace& space,
                  std::size_t points) {
  // VaR_mu from the definition, evaluated at cell midpoints.
  std::vector<std::size_t> order(U.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return U[a] < U[b]; });
  std::vector<double> cum(U.size());
  double F = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    F += space.prob(order[j]);
    cum[j] = F;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double mu = (double(k) + 0.5) * level / double(points);
    std::size_t j = 0;
    while (j + 1 < order.size() && cum[j] <= mu) ++j;
    total += -U[order[j]];
  }
  return total / double(points);
}

bool accepts_ref(const AcceptanceSpec& acc, std::span<const double> U, const ScenarioSpace& space,
                 double tol) {
  switch (acc.kind()) {
    case AcceptanceSpec::Kind::nonnegative:
      return std::all_of(U.begin(), U.end(), [&](double v) { return v >= -tol; });
    case AcceptanceSpec::Kind::expectation_floor: {
      double e = 0.0;
      for (std::size_t w = 0; w < U.size(); ++w) e += space.prob(w) * U[w];
      return e >= acc.floor() - tol;
    }
    case AcceptanceSpec::Kind::expected_shortfall: return es_ref(U, acc.level(), space) <= tol;
    case AcceptanceSpec::Kind::polyhedral:
      for (std::size_t k = 0; k < acc.densities().size(); ++k) {
        double e = 0.0;
        for (std::size_t w = 0; w < U.size(); ++w) e += space.prob(w) * U[w] * acc.densities()[k][w];
        if (e < acc.bounds()[k] - tol) return false;
      }
      return true;
  }
  return false;
}

GridMin rho_grid(const RandomVector& X, const AggregationSpec& agg, const AcceptanceSpec& acc,
                 const ScenarioSpace& space, const GridSpec& grid, Execution exec) {
  grid.validate();
  const std::size_t d = X.rows(), n = X.cols();
  if (grid.dims() != d) throw std::invalid_argument("rho_grid: grid dimension != d");
  if (d > 3) throw std::invalid_argument("rho_grid: d <= 3 required");
  const std::size_t total = grid.size();
  const Best b = sweep(total, false, exec, [&](std::size_t f) {
    std::vector<std::size_t> id(d);
    decode(f, grid.points, id);
    std::vector<double> m(d), x(d), U(n);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      m[i] = grid.coordinate(i, id[i]);
      s += m[i];
    }
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t i = 0; i < d; ++i) x[i] = X(i, w) + m[i];
      U[w] = lambda_ref(agg, x);
    }
    return accepts_ref(acc, U, space, 1e-12) ? s : kInf;
  });
  GridMin out;
  out.value = b.value;
  if (b.index < total) {
    std::vector<std::size_t> id(d);
    decode(b.index, grid.points, id);
    out.argmin.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      out.argmin[i] = grid.coordinate(i, id[i]);
      if (id[i] == 0) out.boundary_hit = true;
    }
  }
  return out;
}

double shortfall_grid(const RandomVariable& X, const UtilityFn& u, double u0,
                      const ScenarioSpace& space, const GridSpec& grid, Execution exec) {
  grid.validate();
  if (grid.dims() != 1) throw std::invalid_argument("shortfall_grid: one-dimensional grid required");
  const Best b = sweep(grid.points[0], false, exec, [&](std::size_t k) {
    const double m = grid.coordinate(0, k);
    double e = 0.0;
    for (std::size_t w = 0; w < X.size(); ++w) e += space.prob(w) * utility_ref(u, X[w] + m);
    return e >= u0 ? m : kInf;
  });
  return b.value;
}

AlphaGrid alpha_raw_grid(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                         const ScenarioSpace& space, std::size_t points, double box, double w_max,
                         Execution exec) {
  if (Z.rows() * Z.cols() > 6) throw std::invalid_argument("alpha_raw_grid: d*n <= 6 required");
  if (points % 2 == 0) ++points;  // keep 0 on the grid
  AlphaGrid out;
  if (std::any_of(Z.flat().begin(), Z.flat().end(), [](double v) { return v < 0.0; })) {
    out.value = out.value_doubled_box = -kInf;
    out.unbounded = true;
    return out;
  }
  out.value = alpha_value(Z, agg, acc, space, points, box, w_max, exec);
  out.value_doubled_box = alpha_value(Z, agg, acc, space, points, 2.0 * box, w_max, exec);
  out.unbounded = looks_unbounded(out.value, out.value_doubled_box);
  return out;
}

double SaddleValues::discrepancy() const {
  if (inf_sup_unbounded && sup_inf_unbounded) return 0.0;
  if (inf_sup_unbounded != sup_inf_unbounded) return kInf;
  return std::abs(inf_sup - sup_inf);
}

SaddleValues saddle_grid(const DualVector& Z, const AggregationSpec& agg, const AcceptanceSpec& acc,
                         const ScenarioSpace& space, std::size_t points, double box, Execution exec) {
  if (Z.rows() * Z.cols() > 6) throw std::invalid_argument("saddle_grid: d*n <= 6 required");
  if (points % 2 == 0) ++points;
  const double w_max = default_w_max(Z);
  SaddleValues s;
  s.sup_inf = alpha_value(Z, agg, acc, space, points, box, w_max, exec);
  const double sup_inf2 = alpha_value(Z, agg, acc, space, points, 2.0 * box, w_max, exec);
  s.sup_inf_unbounded = looks_unbounded(s.sup_inf, sup_inf2);
  s.inf_sup = inf_sup_value(Z, agg, acc, space, points, box, w_max, exec);
  const double inf_sup2 = inf_sup_value(Z, agg, acc, space, points, 2.0 * box, w_max, exec);
  s.inf_sup_unbounded = looks_unbounded(s.inf_sup, inf_sup2);
  double zsum = 0.0;
  for (std::size_t w = 0; w < Z.cols(); ++w)
    for (std::size_t i = 0; i < Z.rows(); ++i) zsum += space.prob(w) * (Z(i, w) + w_max);
  s.resolution = 2.0 * box / double(points - 1) * zsum;
  return s;
}

}  // namespace sysrisk::oracle
