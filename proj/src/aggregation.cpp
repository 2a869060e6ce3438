#include "sysrisk/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sysrisk/scalar.hpp"

namespace sysrisk {

namespace {

constexpr double kFar = 1e4;

std::optional<AffineDominance> builtin_dominance(const std::vector<UtilityFn>& parts) {
  double lo = 0.0, hi = kInf;
  for (const auto& u : parts) {
    lo = std::max(lo, u.right_derivative(0.0));
    hi = std::min(hi, u.left_derivative(0.0));
  }
  if (lo > hi || !(hi > 0.0)) return std::nullopt;
  return AffineDominance{hi, 0.0};
}

}  // namespace

AggregationSpec AggregationSpec::sum(std::size_t d) {
  auto s = componentwise_utility(std::vector<UtilityFn>(d, UtilityFn::linear()));
  s.kind_ = Kind::sum;
  return s;
}

AggregationSpec AggregationSpec::sum_of_losses(std::size_t d) {
  auto s = componentwise_utility(std::vector<UtilityFn>(d, UtilityFn::linear_capped(0.0)));
  s.kind_ = Kind::sum_of_losses;
  return s;
}

AggregationSpec AggregationSpec::utility_of_sum(std::size_t d, UtilityFn u) {
  if (d == 0) throw ValidationError("aggregation dimension must be positive");
  AggregationSpec s;
  s.kind_ = Kind::utility_of_sum;
  s.d_ = d;
  s.parts_ = {u};
  s.homogeneous_ = u.positively_homogeneous();
  s.dominance_ = builtin_dominance(s.parts_);
  return s;
}

AggregationSpec AggregationSpec::componentwise_utility(std::vector<UtilityFn> us) {
  if (us.empty()) throw ValidationError("aggregation dimension must be positive");
  AggregationSpec s;
  s.kind_ = Kind::componentwise_utility;
  s.d_ = us.size();
  s.homogeneous_ =
      std::all_of(us.begin(), us.end(), [](const UtilityFn& u) { return u.positively_homogeneous(); });
  s.dominance_ = builtin_dominance(us);
  s.parts_ = std::move(us);
  return s;
}

AggregationSpec AggregationSpec::custom(std::size_t d, Function f, bool positively_homogeneous,
                                        std::optional<AffineDominance> dominance,
                                        std::string label) {
  if (d == 0) throw ValidationError("aggregation dimension must be positive");
  if (!f) throw ValidationError("custom aggregation needs an evaluator");
  AggregationSpec s;
  s.kind_ = Kind::custom;
  s.d_ = d;
  s.custom_ = std::move(f);
  s.homogeneous_ = positively_homogeneous;
  s.dominance_ = dominance;
  s.label_ = std::move(label);
  const std::vector<double> zero(d, 0.0);
  if (std::abs(s.custom_(zero)) > 1e-12) throw ValidationError("custom aggregation: Lambda(0) != 0");
  return s;
}

std::string AggregationSpec::kind_name() const {
  switch (kind_) {
    case Kind::sum: return "sum";
    case Kind::sum_of_losses: return "sum_of_losses";
    case Kind::utility_of_sum: return "utility_of_sum";
    case Kind::componentwise_utility: return "componentwise_utility";
    case Kind::custom: return "custom:" + label_;
  }
  return "?";
}

double AggregationSpec::operator()(std::span<const double> x) const {
  if (x.size() != d_) throw DimensionError("aggregation: input has wrong dimension");
  if (kind_ == Kind::custom) return custom_(x);
  if (acts_on_total()) return parts_[0](std::accumulate(x.begin(), x.end(), 0.0));
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) s += parts_[i](x[i]);
  return s;
}

void AggregationSpec::supergradient(std::span<const double> x, std::span<double> out) const {
  if (kind_ == Kind::custom) {
    std::vector<double> y(x.begin(), x.end());
    const double f0 = custom_(y);
    for (std::size_t i = 0; i < d_; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
      y[i] = x[i] + h;
      out[i] = (custom_(y) - f0) / h;
      y[i] = x[i];
    }
    return;
  }
  if (acts_on_total()) {
    const double g = parts_[0].right_derivative(std::accumulate(x.begin(), x.end(), 0.0));
    std::fill(out.begin(), out.end(), g);
    return;
  }
  for (std::size_t i = 0; i < d_; ++i) out[i] = parts_[i].right_derivative(x[i]);
}

ConjugateDomain AggregationSpec::conjugate_domain() const {
  if (kind_ == Kind::custom) throw std::logic_error("custom aggregation has no closed-form domain");
  ConjugateDomain dom;
  if (acts_on_total()) {
    dom.box.assign(d_, parts_[0].conjugate_domain());
    dom.equal_coordinates = d_ > 1;
  } else {
    for (const auto& u : parts_) dom.box.push_back(u.conjugate_domain());
  }
  return dom;
}

RandomVariable eval_vector(const AggregationSpec& agg, const RandomVector& X) {
  if (X.rows() != agg.dimension()) throw DimensionError("eval_vector: row count != d");
  std::vector<double> out(X.cols());
  std::vector<double> x(X.rows());
  for (std::size_t w = 0; w < X.cols(); ++w) {
    for (std::size_t i = 0; i < X.rows(); ++i) x[i] = X(i, w);
    out[w] = agg(x);
  }
  return RandomVariable(std::move(out));
}

ConjugateValue concave_conjugate(const AggregationSpec& agg, std::span<const double> z,
                                 double tol) {
  if (z.size() != agg.dimension()) throw DimensionError("conjugate: wrong dimension");
  if (agg.is_custom()) return numeric_conjugate(agg, z, tol);
  const std::size_t d = agg.dimension();
  ConjugateValue out;
  out.argmin.assign(d, 0.0);
  if (agg.acts_on_total()) {
    const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    if (*mx - *mn > tol * std::max(1.0, std::abs(*mx))) {
      // Moving mass from the larger to the smaller coordinate keeps the total fixed.
      out.value = kNegInf;
      out.status = ConjugateStatus::neg_infinite;
      out.argmin[mn - z.begin()] = kFar;
      out.argmin[mx - z.begin()] = -kFar;
      return out;
    }
    const double c = std::accumulate(z.begin(), z.end(), 0.0) / double(d);
    const UtilityFn& u = agg.parts()[0];
    out.value = u.conjugate(c, tol);
    const double s = u.conjugate_argmin(c, tol);
    std::fill(out.argmin.begin(), out.argmin.end(), s / double(d));
  } else {
    double v = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      v += agg.parts()[i].conjugate(z[i], tol);
      out.argmin[i] = agg.parts()[i].conjugate_argmin(z[i], tol);
    }
    out.value = v;
  }
  if (out.value == kNegInf) out.status = ConjugateStatus::neg_infinite;
  return out;
}

ConjugateValue numeric_conjugate(const AggregationSpec& agg, std::span<const double> z,
                                 double tol, int max_iter) {
  const std::size_t d = agg.dimension();
  if (z.size() != d) throw DimensionError("conjugate: wrong dimension");
  auto phi = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += x[i] * z[i];
    return s - agg(x);
  };
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> e(d, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    for (std::size_t j = i + 1; j < d; ++j) {
      std::vector<double> f(d, 0.0);
      f[i] = 1.0;
      f[j] = -1.0;
      dirs.push_back(f);
    }
  }
  if (d > 1) dirs.emplace_back(d, 1.0);

  ConjugateValue out;
  out.argmin.assign(d, 0.0);
  // Ray probe: phi unbounded below along some direction.
  for (const auto& dir : dirs) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> x(d);
      for (double t = 1.0; t <= 1e12; t *= 10.0) {
        for (std::size_t i = 0; i < d; ++i) x[i] = sign * t * dir[i];
        if (phi(x) < kUnboundedCap) {
          out.value = kNegInf;
          out.status = ConjugateStatus::neg_infinite;
          out.argmin = x;
          return out;
        }
      }
    }
  }
  std::vector<double> x(d, 0.0);
  double fx = phi(x);
  for (int it = 0; it < max_iter; ++it) {
    const double before = fx;
    for (const auto& dir : dirs) {
      auto along = [&](double t) {
        std::vector<double> y = x;
        for (std::size_t i = 0; i < d; ++i) y[i] += t * dir[i];
        return -phi(y);
      };
      double span = 1.0;
      while (span < 1e8 && along(span) > along(span / 2)) span *= 2;
      double neg = 1.0;
      while (neg < 1e8 && along(-neg) > along(-neg / 2)) neg *= 2;
      const ScalarOptimum best = golden_section_max(along, -neg, span, 1e-13, 300);
      if (-best.value < fx) {
        for (std::size_t i = 0; i < d; ++i) x[i] += best.x * dir[i];
        fx = -best.value;
      }
      if (fx < kUnboundedCap) {
        out.value = kNegInf;
        out.status = ConjugateStatus::neg_infinite;
        out.argmin = x;
        return out;
      }
    }
    if (before - fx <= tol * std::max(1.0, std::abs(fx))) {
      out.value = fx;
      out.argmin = x;
      return out;
    }
  }
  out.value = fx;
  out.argmin = x;
  out.status = ConjugateStatus::indeterminate;
  return out;
}

ConjugateValue perspective(const AggregationSpec& agg, std::span<const double> z, double w,
                           double tol) {
  const std::size_t d = agg.dimension();
  double znorm = 0.0;
  for (double v : z) znorm = std::max(znorm, std::abs(v));
  if (w <= tol * std::max(1.0, znorm)) {
    ConjugateValue out;
    if (znorm <= tol) {
      out.argmin.assign(d, 0.0);
      return out;
    }
    // The inner infimum is -inf; still return a useful cut point.
    std::vector<double> zs(z.begin(), z.end());
    const double ww = std::max(w, tol * std::max(1.0, znorm));
    for (double& v : zs) v /= ww;
    out = concave_conjugate(agg, zs, tol);
    out.value = kNegInf;
    out.status = ConjugateStatus::neg_infinite;
    return out;
  }
  std::vector<double> zs(z.begin(), z.end());
  for (double& v : zs) v /= w;
  ConjugateValue out = concave_conjugate(agg, zs, tol / w);
  if (out.status == ConjugateStatus::finite) out.value *= w;
  return out;
}

AdmissibilityReport check_admissibility(const AggregationSpec& agg,
                                        const std::vector<std::vector<double>>& grid) {
  AdmissibilityReport rep;
  const std::size_t d = agg.dimension();
  const std::vector<double> zero(d, 0.0);
  if (std::abs(agg(zero)) > 1e-12) rep.violations.push_back("normalization: Lambda(0) != 0");
  auto fmt = [](const std::vector<double>& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
    return s + ")";
  };
  std::vector<double> vals(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) vals[k] = agg(grid[k]);
  std::vector<double> mid(d);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      const auto& x = grid[a];
      const auto& y = grid[b];
      for (std::size_t i = 0; i < d; ++i) mid[i] = 0.5 * (x[i] + y[i]);
      const double scale = 1e-9 * (1.0 + std::abs(vals[a]) + std::abs(vals[b]));
      if (agg(mid) < 0.5 * (vals[a] + vals[b]) - scale)
        rep.violations.push_back("concavity: midpoint of " + fmt(x) + " and " + fmt(y));
      bool x_le_y = true, y_le_x = true;
      for (std::size_t i = 0; i < d; ++i) {
        x_le_y = x_le_y && x[i] <= y[i];
        y_le_x = y_le_x && y[i] <= x[i];
      }
      if ((x_le_y && vals[a] > vals[b] + scale) || (y_le_x && vals[b] > vals[a] + scale))
        rep.violations.push_back("monotonicity: " + fmt(x) + " vs " + fmt(y));
    }
  }
  return rep;
}

std::vector<std::vector<double>> default_admissibility_grid(std::size_t d) {
  const std::vector<double> axis{-3.0, -1.0, -0.25, 0.0, 0.5, 2.0};
  std::vector<std::vector<double>> pts{{}};
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::vector<double>> next;
    for (const auto& p : pts)
      for (double v : axis) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

bool verify_affine_dominance(const AggregationSpec& agg, const AffineDominance& ab,
                             const std::vector<std::vector<double>>& grid) {
  if (!(ab.a > 0.0)) return false;
  for (const auto& x : grid) {
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    if (agg(x) > ab.a * s + ab.b + 1e-9 * (1.0 + std::abs(s))) return false;
  }
  return true;
}

}  // namespace sysrisk
