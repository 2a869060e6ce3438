#include <doctest.h>

#include "../support/generators.hpp"
#include "sysrisk/lp.hpp"

using namespace sysrisk;
using namespace sysrisk::testing;

namespace {

bool satisfies(const LpProblem& lp, const std::vector<double>& x, double tol = 1e-8) {
  for (double v : x)
    if (v < -tol) return false;
  for (const auto& r : lp.rows) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += r.coeffs[j] * x[j];
    if (r.sense == RowSense::less_equal && s > r.rhs + tol) return false;
    if (r.sense == RowSense::greater_equal && s < r.rhs - tol) return false;
    if (r.sense == RowSense::equal && std::abs(s - r.rhs) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("small LP optimum") {
  LpProblem lp;
  lp.cost = {-1, -1};
  lp.add_row({1, 2}, RowSense::less_equal, 4);
  lp.add_row({3, 1}, RowSense::less_equal, 6);
  for (PivotRule rule : {PivotRule::bland, PivotRule::dantzig}) {
    const LpSolution s = solve_lp(lp, rule);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(-2.8));
    CHECK(s.x[0] == doctest::Approx(1.6));
    CHECK(s.x[1] == doctest::Approx(1.2));
  }
}

TEST_CASE("equality and greater-equal rows") {
  LpProblem lp;
  lp.cost = {1, 2};
  lp.add_row({1, 1}, RowSense::equal, 3);
  lp.add_row({0, 1}, RowSense::greater_equal, 1);
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective == doctest::Approx(4.0));
  CHECK(satisfies(lp, s.x));
}

TEST_CASE("negative right-hand sides") {
  LpProblem lp;
  lp.cost = {1};
  lp.add_row({-1}, RowSense::less_equal, -2.5);
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(2.5));
}

TEST_CASE("infeasible and unbounded problems") {
  LpProblem bad;
  bad.cost = {1};
  bad.add_row({1}, RowSense::greater_equal, 2);
  bad.add_row({1}, RowSense::less_equal, 1);
  CHECK(solve_lp(bad).status == LpStatus::infeasible);

  LpProblem open;
  open.cost = {-1, 0};
  open.add_row({1, -1}, RowSense::less_equal, 1);
  CHECK(solve_lp(open).status == LpStatus::unbounded);
}

TEST_CASE("degenerate problem that cycles under the textbook largest-coefficient rule") {
  LpProblem lp;
  lp.cost = {-0.75, 20, -0.5, 6};
  lp.add_row({0.25, -8, -1, 9}, RowSense::less_equal, 0);
  lp.add_row({0.5, -12, -0.5, 3}, RowSense::less_equal, 0);
  lp.add_row({0, 0, 1, 0}, RowSense::less_equal, 1);
  for (PivotRule rule : {PivotRule::bland, PivotRule::dantzig}) {
    const LpSolution s = solve_lp(lp, rule);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(-1.25));
  }
}

TEST_CASE("pivot rules agree on random bounded problems") {
  Rng rng(31);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = pick(rng, 2, 6), m = pick(rng, 1, 6);
    LpProblem lp;
    lp.cost.resize(n);
    for (double& c : lp.cost) c = round2(uniform(rng, -2, 2));
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<double> a(n);
      for (double& v : a) v = round2(uniform(rng, -1, 2));
      lp.add_row(a, RowSense::less_equal, round2(uniform(rng, 0.5, 3)));
    }
    // A box keeps every instance bounded; the origin keeps it feasible.
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      lp.add_row(e, RowSense::less_equal, 5.0);
    }
    const LpSolution a = solve_lp(lp, PivotRule::bland);
    const LpSolution b = solve_lp(lp, PivotRule::dantzig);
    REQUIRE(a.status == LpStatus::optimal);
    REQUIRE(b.status == LpStatus::optimal);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
    CHECK(satisfies(lp, a.x));
    CHECK(satisfies(lp, b.x));
  }
}
