#include <doctest.h>

#include <cmath>

#include "emerge/rng.hpp"
#include "emerge/simplex.hpp"

using namespace emerge;

TEST_CASE("bounded maximization with inequality rows") {
  // min -2x - y  s.t.  x + y <= 1, x <= 0.6  ->  x = 0.6, y = 0.4.
  lp::Problem p;
  p.num_vars = 2;
  p.objective = {-2.0, -1.0};
  p.constraints = {{{1.0, 1.0}, lp::Relation::le, 1.0},
                   {{1.0, 0.0}, lp::Relation::le, 0.6}};
  auto sol = lp::minimize(p);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(-1.6).epsilon(1e-12));
  CHECK(sol.x[0] == doctest::Approx(0.6));
  CHECK(sol.x[1] == doctest::Approx(0.4));
  // Unique duals: both rows bind.
  CHECK(sol.duals[0] == doctest::Approx(-1.0));
  CHECK(sol.duals[1] == doctest::Approx(-1.0));
  CHECK(sol.duals[0] * 1.0 + sol.duals[1] * 0.6 ==
        doctest::Approx(sol.objective));
  CHECK(sol.primal_residual <= 1e-9);
  CHECK(sol.dual_residual <= 1e-9);
}

TEST_CASE("equality and ge rows with duals") {
  {
    lp::Problem p;
    p.num_vars = 2;
    p.objective = {1.0, 1.0};
    p.constraints = {{{1.0, 1.0}, lp::Relation::eq, 1.0}};
    auto sol = lp::minimize(p);
    REQUIRE(sol.status == lp::Status::optimal);
    CHECK(sol.objective == doctest::Approx(1.0));
    CHECK(sol.duals[0] == doctest::Approx(1.0));
  }
  {
    lp::Problem p;
    p.num_vars = 1;
    p.objective = {1.0};
    p.constraints = {{{1.0}, lp::Relation::ge, 2.0}};
    auto sol = lp::minimize(p);
    REQUIRE(sol.status == lp::Status::optimal);
    CHECK(sol.x[0] == doctest::Approx(2.0));
    CHECK(sol.duals[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("infeasible, unbounded and iteration-limited solves") {
  {
    lp::Problem p;
    p.num_vars = 1;
    p.objective = {1.0};
    p.constraints = {{{1.0}, lp::Relation::ge, 1.0},
                     {{1.0}, lp::Relation::le, 0.5}};
    CHECK(lp::minimize(p).status == lp::Status::infeasible);
  }
  {
    lp::Problem p;
    p.num_vars = 1;
    p.objective = {-1.0};
    CHECK(lp::minimize(p).status == lp::Status::unbounded);
  }
  {
    lp::Problem p;
    p.num_vars = 2;
    p.objective = {-2.0, -1.0};
    p.constraints = {{{1.0, 1.0}, lp::Relation::le, 1.0},
                     {{1.0, 0.0}, lp::Relation::le, 0.6}};
    lp::Options opt;
    opt.max_iterations = 1;
    CHECK(lp::minimize(p, opt).status == lp::Status::iteration_limit);
  }
}

TEST_CASE("transportation system with a redundant row") {
  // Marginal constraints of a 2x2 coupling have rank 3; the solver must
  // handle the dependent row and still return consistent duals.
  lp::Problem p;
  p.num_vars = 4;  // p00 p01 p10 p11
  p.objective = {0.0, -2.0, -2.0, -2.0};  // maximize the max-merger value
  p.constraints = {{{1, 1, 0, 0}, lp::Relation::eq, 0.5},
                   {{0, 0, 1, 1}, lp::Relation::eq, 0.5},
                   {{1, 0, 1, 0}, lp::Relation::eq, 0.5},
                   {{0, 1, 0, 1}, lp::Relation::eq, 0.5}};
  auto sol = lp::minimize(p);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(sol.x[0] == doctest::Approx(0.0));
  double dual_value = 0.0;
  for (std::size_t i = 0; i < 4; ++i) dual_value += 0.5 * sol.duals[i];
  CHECK(dual_value == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(sol.primal_residual <= 1e-9);
  CHECK(sol.dual_residual <= 1e-9);
}

TEST_CASE("random transportation programs satisfy strong duality") {
  rng::SplitMix64 gen(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + gen.index(3);
    const std::size_t n = 2 + gen.index(3);
    std::vector<double> row(m), col(n);
    double sum = 0.0;
    for (double& v : row) {
      v = gen.exponential() + 0.05;
      sum += v;
    }
    for (double& v : row) v /= sum;
    sum = 0.0;
    for (double& v : col) {
      v = gen.exponential() + 0.05;
      sum += v;
    }
    for (double& v : col) v /= sum;

    lp::Problem p;
    p.num_vars = m * n;
    p.objective.resize(m * n);
    for (double& c : p.objective) c = -4.0 * gen.uniform01();
    for (std::size_t i = 0; i < m; ++i) {
      lp::Constraint c;
      c.coeffs.assign(m * n, 0.0);
      for (std::size_t j = 0; j < n; ++j) c.coeffs[i * n + j] = 1.0;
      c.rel = lp::Relation::eq;
      c.rhs = row[i];
      p.constraints.push_back(std::move(c));
    }
    for (std::size_t j = 0; j < n; ++j) {
      lp::Constraint c;
      c.coeffs.assign(m * n, 0.0);
      for (std::size_t i = 0; i < m; ++i) c.coeffs[i * n + j] = 1.0;
      c.rel = lp::Relation::eq;
      c.rhs = col[j];
      p.constraints.push_back(std::move(c));
    }
    auto sol = lp::minimize(p);
    REQUIRE(sol.status == lp::Status::optimal);
    double dual_value = 0.0;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      dual_value += sol.duals[i] * p.constraints[i].rhs;
    }
    CHECK(std::fabs(dual_value - sol.objective) <= 1e-8);
    CHECK(sol.primal_residual <= 1e-9);
    CHECK(sol.dual_residual <= 1e-9);
  }
}
