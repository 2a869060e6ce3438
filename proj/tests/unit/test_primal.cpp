#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "sysrisk/oracle.hpp"
#include "sysrisk/primal.hpp"

using namespace sysrisk;
using namespace sysrisk::testing;

namespace {

const ScenarioSpace kHalf({0.5, 0.5});
const RandomVector kWorked = RandomVector::from_rows({{1, -2}, {0, 1}});

RandomVector blend(const RandomVector& X, const RandomVector& Y, double t) {
  RandomVector out = X;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t w = 0; w < X.cols(); ++w) out(i, w) = t * X(i, w) + (1.0 - t) * Y(i, w);
  return out;
}

double total(const std::vector<double>& m) {
  double s = 0.0;
  for (double v : m) s += v;
  return s;
}

}  // namespace

TEST_CASE("worked examples") {
  const PrimalResult r = rho(kWorked, AggregationSpec::sum(2), AcceptanceSpec::nonnegative(), kHalf);
  REQUIRE(r.status == PrimalStatus::optimal);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(r.m_star.has_value());
  CHECK(total(*r.m_star) == doctest::Approx(1.0).epsilon(1e-6));

  CHECK(rho(kWorked, AggregationSpec::sum(2), AcceptanceSpec::expectation_floor(0.0), kHalf).value ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(rho_tilde(kWorked, AggregationSpec::sum_of_losses(2), AcceptanceSpec::expected_shortfall(0.5), kHalf)
            .value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rho_tilde(kWorked, AggregationSpec::sum(2), AcceptanceSpec::nonnegative(), kHalf).value ==
        doctest::Approx(1.0).epsilon(1e-9));

  const ScenarioSpace three({0.25, 0.25, 0.5});
  const RandomVector zero = RandomVector::zeros(2, 3);
  CHECK(rho(zero, AggregationSpec::sum_of_losses(2), AcceptanceSpec::expected_shortfall(0.5), three).value ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(rho_tilde(zero, AggregationSpec::sum_of_losses(2), AcceptanceSpec::expected_shortfall(0.5), three)
            .value == doctest::Approx(0.0));
}

TEST_CASE("rho and rho_tilde coincide for the sum") {
  Rng rng(41);
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = pick(rng, 2, 4);
    const ScenarioSpace space = random_space(rng, n);
    const RandomVector X = random_positions(rng, 2, n, 2.0);
    for (const auto& named : builtin_acceptances()) {
      const AcceptanceSpec acc = named.make(space, rng);
      const double r = rho(X, AggregationSpec::sum(2), acc, space).value;
      const double rt = rho_tilde(X, AggregationSpec::sum(2), acc, space).value;
      CHECK(r == doctest::Approx(rt).epsilon(1e-6));
    }
  }
}

TEST_CASE("diagnostics separate sum from sum_of_losses") {
  const auto acc = AcceptanceSpec::nonnegative();
  const Diagnostics sum = diagnostics(kWorked, AggregationSpec::sum(2), acc, kHalf);
  CHECK(sum.proper);
  CHECK(sum.rho_at_zero == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_FALSE(sum.M0_intersection_trivial);
  CHECK_FALSE(sum.negative_constants_rejected);
  CHECK(sum.affine_dominance_ok);
  CHECK(sum.interior_point_found.has_value());

  const Diagnostics losses = diagnostics(kWorked, AggregationSpec::sum_of_losses(2), acc, kHalf);
  CHECK(losses.proper);
  CHECK(losses.M0_intersection_trivial);
  CHECK(losses.negative_constants_rejected);
}

TEST_CASE("a Lambda that ignores a component gives a non-proper measure") {
  const auto first = AggregationSpec::custom(
      2, [](std::span<const double> x) { return x[0]; }, true, std::nullopt, "first");
  const PrimalResult r = rho(kWorked, first, AcceptanceSpec::nonnegative(), kHalf);
  CHECK(r.value == kNegInf);
  CHECK(r.status == PrimalStatus::unbounded_below);
  CHECK_FALSE(diagnostics(kWorked, first, AcceptanceSpec::nonnegative(), kHalf).proper);
}

TEST_CASE("monotonicity, convexity and cash additivity") {
  Rng rng(42);
  for (const auto& named : builtin_aggregations()) {
    for (const auto& nacc : builtin_acceptances()) {
      for (int k = 0; k < 3; ++k) {
        const std::size_t n = pick(rng, 2, 3);
        const ScenarioSpace space = random_space(rng, n);
        const AggregationSpec agg = named.make(2);
        const AcceptanceSpec acc = nacc.make(space, rng);
        const RandomVector X = random_positions(rng, 2, n, 2.0);
        const RandomVector Y = random_positions(rng, 2, n, 2.0);
        RandomVector up = X;
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t w = 0; w < n; ++w) up(i, w) += round2(uniform(rng, 0.0, 1.0));
        const double rx = rho(X, agg, acc, space).value;
        const double ry = rho(Y, agg, acc, space).value;
        INFO(named.name, " / ", nacc.name);
        REQUIRE(std::isfinite(rx));
        REQUIRE(std::isfinite(ry));
        const double tol = 1e-5 * (1.0 + std::abs(rx) + std::abs(ry));
        CHECK(rho(up, agg, acc, space).value <= rx + tol);
        CHECK(rho(blend(X, Y, 0.3), agg, acc, space).value <= 0.3 * rx + 0.7 * ry + tol);
        const std::vector<double> m{0.75, -1.25};
        CHECK(rho(shift(X, m), agg, acc, space).value == doctest::Approx(rx + 0.5).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("rho agrees with the grid oracle") {
  Rng rng(43);
  for (const auto& nacc : builtin_acceptances()) {
    for (const auto& agg : {AggregationSpec::sum(2), AggregationSpec::sum_of_losses(2)}) {
      for (int k = 0; k < 4; ++k) {
        const std::size_t n = pick(rng, 2, 3);
        const ScenarioSpace space = random_space(rng, n);
        const AcceptanceSpec acc = nacc.make(space, rng);
        const RandomVector X = random_positions(rng, 2, n, 2.0);
        const auto grid = oracle::GridSpec::uniform(2, -8.0, 8.0, 161);
        const oracle::GridMin g = oracle::rho_grid(X, agg, acc, space, grid);
        const double r = rho(X, agg, acc, space).value;
        INFO(nacc.name);
        REQUIRE(std::isfinite(g.value));
        // Minimizers lie well inside the box. Rounding one up to the grid stays
        // feasible and costs at most two steps.
        CHECK(r <= g.value + 1e-6);
        CHECK(g.value <= r + 2.0 * grid.resolution() + 1e-6);
      }
    }
  }
}
