#include <doctest.h>

#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "../support/generators.hpp"
#include "sysrisk/oracle.hpp"
#include "sysrisk/shortfall.hpp"

using namespace sysrisk;
using namespace sysrisk::testing;

namespace {

const ScenarioSpace kHalf({0.5, 0.5});
const RandomVariable kX({-1.0, 3.0});

std::vector<UtilityFn> utilities() {
  return {UtilityFn::linear(), UtilityFn::exponential(1.0), UtilityFn::exponential(0.3), UtilityFn::power(2.0),
          UtilityFn::linear_capped(1.0)};
}

RandomVariable random_variable(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = round2(uniform(rng, -3, 3));
  return RandomVariable(v);
}

}  // namespace

TEST_CASE("closed-form shortfall values") {
  const ShortfallSpec lin(UtilityFn::linear(), 0.0);
  CHECK(rho_u_primal(kX, lin, kHalf).value == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(rho_u_primal(RandomVariable::constant(3, 2.5), ShortfallSpec(UtilityFn::exponential(2.0), 0.0),
                     ScenarioSpace({0.2, 0.3, 0.5}))
            .value == doctest::Approx(-2.5).epsilon(1e-9));
  const ShortfallSpec lin_floor(UtilityFn::linear(), -0.5);
  CHECK(rho_u_primal(kX, lin_floor, kHalf).value == doctest::Approx(-1.5).epsilon(1e-9));
}

TEST_CASE("exponential shortfall matches an independent root find") {
  const ShortfallSpec spec(UtilityFn::exponential(1.0), 0.0);
  auto f = [](double m) { return 1.0 - 0.5 * (std::exp(1.0 - m) + std::exp(-3.0 - m)); };
  std::uintmax_t iters = 100;
  const auto bracket =
      boost::math::tools::toms748_solve(f, -5.0, 5.0, boost::math::tools::eps_tolerance<double>(52), iters);
  const double root = 0.5 * (bracket.first + bracket.second);
  CHECK(root == doctest::Approx(0.3250027473578644).epsilon(1e-14));
  CHECK(rho_u_primal(kX, spec, kHalf).value == doctest::Approx(root).epsilon(1e-9));
  const DualityReport d = rho_u_dual(kX, spec, kHalf);
  REQUIRE(d.dual_value.has_value());
  CHECK(*d.dual_value == doctest::Approx(root).epsilon(1e-6));
  CHECK(d.mode == DualMode::shortfall);
}

TEST_CASE("unreachable thresholds are rejected") {
  CHECK_THROWS_AS(ShortfallSpec(UtilityFn::exponential(1.0), 1.0), ValidationError);
  CHECK_THROWS_AS(ShortfallSpec(UtilityFn::linear_capped(0.5), 0.5), ValidationError);
  CHECK_NOTHROW(ShortfallSpec(UtilityFn::linear_capped(0.5), 0.4));
}

TEST_CASE("shortfall duality") {
  Rng rng(71);
  for (const auto& u : utilities()) {
    for (int k = 0; k < 8; ++k) {
      const std::size_t n = pick(rng, 2, 5);
      const ScenarioSpace space = random_space(rng, n);
      const RandomVariable X = random_variable(rng, n);
      const ShortfallSpec spec(u, -round2(uniform(rng, 0.0, 0.5)));
      const double p = rho_u_primal(X, spec, space).value;
      const DualityReport d = rho_u_dual(X, spec, space);
      INFO(u.name(), " k=", k);
      REQUIRE(d.dual_value.has_value());
      CHECK(*d.dual_value == doctest::Approx(p).epsilon(1e-6));
      // Every dual point is a lower bound.
      for (int j = 0; j < 5; ++j) {
        const RandomVariable q = random_density(rng, space);
        const double lam = std::exp(uniform(rng, -3, 3));
        CHECK(shortfall_dual_objective(X, spec, space, q.values(), lam) <= p + 1e-9 * (1.0 + std::abs(p)));
      }
    }
  }
}

TEST_CASE("shortfall is cash additive, monotone and convex") {
  Rng rng(72);
  for (const auto& u : utilities()) {
    const ShortfallSpec spec(u, -0.25);
    for (int k = 0; k < 10; ++k) {
      const std::size_t n = pick(rng, 2, 5);
      const ScenarioSpace space = random_space(rng, n);
      const RandomVariable X = random_variable(rng, n), Y = random_variable(rng, n);
      const double rx = rho_u_primal(X, spec, space).value, ry = rho_u_primal(Y, spec, space).value;
      std::vector<double> shifted(n), mixed(n), up(n);
      for (std::size_t w = 0; w < n; ++w) {
        shifted[w] = X[w] + 0.7;
        mixed[w] = 0.4 * X[w] + 0.6 * Y[w];
        up[w] = std::max(X[w], Y[w]);
      }
      INFO(u.name());
      CHECK(rho_u_primal(RandomVariable(shifted), spec, space).value == doctest::Approx(rx - 0.7).epsilon(1e-8));
      CHECK(rho_u_primal(RandomVariable(mixed), spec, space).value <= 0.4 * rx + 0.6 * ry + 1e-8);
      CHECK(rho_u_primal(RandomVariable(up), spec, space).value <= std::min(rx, ry) + 1e-8);
    }
  }
}

TEST_CASE("shortfall equals the systemic measure with one component") {
  Rng rng(73);
  for (const auto& u : utilities()) {
    for (int k = 0; k < 5; ++k) {
      const std::size_t n = pick(rng, 2, 4);
      const ScenarioSpace space = random_space(rng, n);
      const RandomVariable X = random_variable(rng, n);
      const double u0 = -round2(uniform(rng, 0.0, 0.5));
      const double direct = rho_u_primal(X, ShortfallSpec(u, u0), space).value;
      const RandomVector X1(1, n, std::vector<double>(X.values().begin(), X.values().end()));
      const double systemic = rho(X1, AggregationSpec::componentwise_utility({u}),
                                  AcceptanceSpec::expectation_floor(u0), space)
                                  .value;
      INFO(u.name());
      CHECK(systemic == doctest::Approx(direct).epsilon(1e-6));
    }
  }
}

TEST_CASE("shortfall agrees with the grid oracle") {
  Rng rng(74);
  for (const auto& u : utilities()) {
    const std::size_t n = 3;
    const ScenarioSpace space = random_space(rng, n);
    const RandomVariable X = random_variable(rng, n);
    const auto grid = oracle::GridSpec::uniform(1, -10.0, 10.0, 2001);
    const double g = oracle::shortfall_grid(X, u, -0.1, space, grid);
    const double p = rho_u_primal(X, ShortfallSpec(u, -0.1), space).value;
    INFO(u.name());
    CHECK(p <= g + 1e-9);
    CHECK(g <= p + grid.resolution() + 1e-9);
    CHECK(expected_utility(X, g, u, space) >= -0.1 - 1e-12);
  }
}
