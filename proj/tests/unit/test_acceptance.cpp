#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "sysrisk/acceptance.hpp"
#include "sysrisk/oracle.hpp"

using namespace sysrisk;
using namespace sysrisk::testing;

namespace {

const ScenarioSpace kHalf({0.5, 0.5});
const RandomVariable kU({-1.0, 3.0});

}  // namespace

TEST_CASE("value at risk") {
  CHECK(var_level(kU, 0.25, kHalf) == doctest::Approx(1.0));
  CHECK(var_level(kU, 0.5, kHalf) == doctest::Approx(-3.0));
  CHECK(var_level(RandomVariable::constant(3, 2.0), 0.3, ScenarioSpace({0.2, 0.3, 0.5})) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(var_level(kU, 0.0, kHalf), ValidationError);
  CHECK_THROWS_AS(var_level(kU, 1.0, kHalf), ValidationError);
}

TEST_CASE("expected shortfall") {
  CHECK(es_level(kU, 0.5, kHalf) == doctest::Approx(1.0));
  CHECK(es_level(kU, 0.75, kHalf) == doctest::Approx(-1.0 / 3.0));
  CHECK(es_level(RandomVariable::constant(2, 1.5), 0.4, kHalf) == doctest::Approx(-1.5));
}

TEST_CASE("expected shortfall matches the independent references") {
  Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = pick(rng, 1, 7);
    const ScenarioSpace space = random_space(rng, n);
    std::vector<double> u(n);
    for (double& v : u) v = round2(uniform(rng, -4, 4));
    const RandomVariable U(u);
    const double level = uniform(rng, 0.02, 0.98);
    CHECK(es_level(U, level, space) == doctest::Approx(oracle::es_ref(u, level, space)).epsilon(1e-10));
    CHECK(var_level(U, level, space) == doctest::Approx(oracle::var_ref(u, level, space)).epsilon(1e-12));
    // The worst-case density reproduces ES and stays inside its box.
    const std::vector<double> W = es_density(u, level, space);
    double pairing = 0.0, mass = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
      pairing += space.prob(w) * u[w] * W[w];
      mass += space.prob(w) * W[w];
      CHECK(W[w] >= 0.0);
      CHECK(W[w] <= 1.0 / level + 1e-12);
    }
    CHECK(mass == doctest::Approx(1.0));
    CHECK(-pairing == doctest::Approx(es_level(U, level, space)).epsilon(1e-10));
  }
}

TEST_CASE("membership") {
  const RandomVariable zero = RandomVariable::constant(2, 0.0);
  for (const auto& acc : {AcceptanceSpec::nonnegative(), AcceptanceSpec::expectation_floor(0.0),
                          AcceptanceSpec::expected_shortfall(0.5),
                          AcceptanceSpec::polyhedral({RandomVariable({1.0, 1.0})}, {0.0})})
    CHECK(contains(acc, zero, kHalf));
  CHECK(contains(AcceptanceSpec::expectation_floor(0.0), kU, kHalf));
  CHECK_FALSE(contains(AcceptanceSpec::expected_shortfall(0.5), kU, kHalf));
  CHECK_FALSE(contains(AcceptanceSpec::nonnegative(), kU, kHalf));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(AcceptanceSpec::expected_shortfall(0.0), ValidationError);
  CHECK_THROWS_AS(AcceptanceSpec::expected_shortfall(1.2), ValidationError);
  CHECK_THROWS_AS(AcceptanceSpec::expectation_floor(0.5), ValidationError);
  CHECK_THROWS_AS(AcceptanceSpec::polyhedral({RandomVariable({1.0, -1.0})}, {0.0}), ValidationError);
  CHECK_THROWS_AS(AcceptanceSpec::polyhedral({RandomVariable({1.0, 1.0})}, {0.5}), ValidationError);
  CHECK_THROWS_AS(AcceptanceSpec::polyhedral({RandomVariable({1.0, 1.0})}, {0.0, 0.0}), ValidationError);
  const auto poly = AcceptanceSpec::polyhedral({RandomVariable({1.0, 1.0, 1.0})}, {0.0});
  CHECK_THROWS_AS(poly.check_against(kHalf), DimensionError);
}

TEST_CASE("support functions") {
  CHECK(support_function(AcceptanceSpec::nonnegative(), RandomVariable({1, 2}), kHalf) == 0.0);
  CHECK(support_function(AcceptanceSpec::nonnegative(), RandomVariable({1, -2}), kHalf) == kNegInf);
  CHECK(support_function(AcceptanceSpec::expectation_floor(-1.0), RandomVariable::constant(2, 2.0), kHalf) ==
        doctest::Approx(-2.0));
  CHECK(support_function(AcceptanceSpec::expectation_floor(-1.0), RandomVariable({1, 3}), kHalf) == kNegInf);
  const auto es = AcceptanceSpec::expected_shortfall(0.5);
  CHECK(support_function(es, RandomVariable({2, 0}), kHalf) == 0.0);
  CHECK(support_function(es, RandomVariable({3, 0}), kHalf) == 0.0);
  // At level 0.75 densities are capped at 4/3, so {2, 0} after normalizing is outside.
  const auto tight = AcceptanceSpec::expected_shortfall(0.75);
  CHECK(support_function(tight, RandomVariable({3, 0}), kHalf) == kNegInf);
  CHECK(support_function(tight, RandomVariable({5, 3}), kHalf) == 0.0);
  CHECK(in_barrier_cone(es, RandomVariable({3, 0}), kHalf));
  CHECK_FALSE(in_barrier_cone(tight, RandomVariable({3, 0}), kHalf));
  CHECK(in_barrier_cone(AcceptanceSpec::expectation_floor(-1.0), RandomVariable::constant(2, 2.0), kHalf));
  CHECK_FALSE(in_barrier_cone(AcceptanceSpec::nonnegative(), RandomVariable({1, -2}), kHalf));

  // Polyhedral: sigma(W) = sup { sum lam_k a_k : sum lam_k W_k = W, lam >= 0 }.
  const auto poly = AcceptanceSpec::polyhedral({RandomVariable({2, 0}), RandomVariable({0, 2})}, {-1.0, -0.5});
  CHECK(support_function(poly, RandomVariable({4, 2}), kHalf) == doctest::Approx(2 * -1.0 + 1 * -0.5));
  CHECK(support_function(poly, RandomVariable({-1, 2}), kHalf) == kNegInf);
}

TEST_CASE("support function properties") {
  Rng rng(22);
  for (const auto& named : builtin_acceptances()) {
    for (int k = 0; k < 40; ++k) {
      const std::size_t n = pick(rng, 2, 6);
      const ScenarioSpace space = random_space(rng, n);
      const AcceptanceSpec acc = named.make(space, rng);
      const RandomVariable A = random_density(rng, space), B = random_density(rng, space);
      // Constant multiples land in the floor's barrier cone too.
      const RandomVariable V = k % 2 == 0 ? RandomVariable::constant(n, uniform(rng, 0.5, 2.0)) : A;
      const double sa = support_function(acc, V, space), sb = support_function(acc, B, space);
      std::vector<double> sum(n), scaled(n), neg(V.values().begin(), V.values().end());
      for (std::size_t w = 0; w < n; ++w) {
        sum[w] = V[w] + B[w];
        scaled[w] = 3.0 * V[w];
      }
      neg[0] = -0.5;
      const double ss = support_function(acc, RandomVariable(sum), space);
      if (std::isfinite(sa) && std::isfinite(sb)) CHECK(ss >= sa + sb - 1e-8);
      const double s3 = support_function(acc, RandomVariable(scaled), space);
      if (std::isfinite(sa)) CHECK(s3 == doctest::Approx(3.0 * sa).epsilon(1e-8));
      CHECK(support_function(acc, RandomVariable(neg), space) == kNegInf);
      CHECK(sa <= 0.0);
    }
  }
}

TEST_CASE("univariate risk measure") {
  CHECK(rho_A(AcceptanceSpec::expectation_floor(0.0), kU, kHalf) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(rho_A(AcceptanceSpec::expected_shortfall(0.5), kU, kHalf) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rho_A(AcceptanceSpec::nonnegative(), kU, kHalf) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("univariate risk measure properties") {
  Rng rng(23);
  for (const auto& named : builtin_acceptances()) {
    for (int k = 0; k < 30; ++k) {
      const std::size_t n = pick(rng, 2, 6);
      const ScenarioSpace space = random_space(rng, n);
      const AcceptanceSpec acc = named.make(space, rng);
      std::vector<double> u(n);
      for (double& v : u) v = round2(uniform(rng, -3, 3));
      const RandomVariable U(u);
      const double r = rho_A(acc, U, space);
      REQUIRE(std::isfinite(r));
      const double c = round2(uniform(rng, -2, 2));
      std::vector<double> shifted = u;
      for (double& v : shifted) v += c;
      CHECK(rho_A(acc, RandomVariable(shifted), space) == doctest::Approx(r - c).epsilon(1e-8));
      // Acceptance and risk agree away from the boundary.
      if (std::abs(r) > 1e-6) CHECK(contains(acc, U, space) == (r < 0.0));
      // Outside A some barrier direction separates U.
      if (!contains(acc, U, space)) {
        std::vector<RandomVariable> candidates{RandomVariable::constant(n, 1.0),
                                               RandomVariable(es_density(u, 0.5, space))};
        for (std::size_t w = 0; w < n; ++w) {
          std::vector<double> e(n, 0.0);
          e[w] = 1.0;
          candidates.emplace_back(e);
        }
        if (acc.kind() == AcceptanceSpec::Kind::expected_shortfall)
          candidates.emplace_back(es_density(u, acc.level(), space));
        for (const auto& D : acc.densities()) candidates.push_back(D);
        bool separated = false;
        for (const auto& W : candidates) {
          double e = 0.0;
          for (std::size_t w = 0; w < n; ++w) e += space.prob(w) * u[w] * W[w];
          const double sig = support_function(acc, W, space);
          separated = separated || (std::isfinite(sig) && e < sig - 1e-12);
        }
        CHECK(separated);
      }
    }
  }
}
