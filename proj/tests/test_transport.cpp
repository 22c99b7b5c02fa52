#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "emerge/core.hpp"
#include "emerge/oracle.hpp"
#include "emerge/rng.hpp"
#include "emerge/transport.hpp"

using namespace emerge;

namespace {

GridFunction max_grid(double theta, std::size_t arity,
                      std::vector<double> axis) {
  std::vector<std::vector<double>> axes(arity, axis);
  return grid_sample(
      [](std::span<const double> e) {
        double m = 0.0;
        for (double v : e) m = std::max(m, v);
        return m;
      },
      theta, std::move(axes));
}

// Monotone envelope of independent uniforms: a random coordinatewise
// nondecreasing table.
GridFunction random_monotone_grid(rng::SplitMix64& gen, double theta,
                                  std::vector<std::vector<double>> axes) {
  std::size_t total = 1;
  for (const auto& axis : axes) total *= axis.size();
  std::vector<double> noise(total);
  for (double& v : noise) v = 2.0 * gen.uniform01();
  GridFunction shape(theta, axes, std::vector<double>(total, 0.0));
  std::vector<double> values(total, 0.0);
  std::vector<std::size_t> idx(axes.size());
  for (std::size_t flat = 0; flat < total; ++flat) {
    shape.unflatten(flat, idx);
    double v = noise[flat];
    for (std::size_t k = 0; k < axes.size(); ++k) {
      if (idx[k] == 0) continue;
      std::vector<std::size_t> prev(idx.begin(), idx.end());
      prev[k] -= 1;
      v = std::max(v, values[shape.flatten(prev)]);
    }
    values[flat] = v;
  }
  return GridFunction(theta, std::move(axes), std::move(values));
}

DiscreteDistribution random_evalue_law(rng::SplitMix64& gen,
                                       std::span<const double> axis,
                                       std::size_t max_atoms) {
  const std::size_t count =
      std::min(axis.size(), std::size_t{2} + gen.index(max_atoms - 1));
  std::vector<std::size_t> picks(axis.size());
  std::iota(picks.begin(), picks.end(), 0);
  for (std::size_t i = picks.size(); i > 1; --i) {
    std::swap(picks[i - 1], picks[gen.index(i)]);
  }
  picks.resize(count);
  std::sort(picks.begin(), picks.end());
  if (axis[picks.front()] != 0.0) picks.front() = 0;  // keep 0 available
  std::vector<double> atoms, probs;
  for (std::size_t i : picks) atoms.push_back(axis[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    probs.push_back(gen.exponential() + 0.05);
    sum += probs.back();
  }
  for (double& p : probs) p /= sum;
  // Blend mass toward the zero atom until the mean drops to 1.
  double mean = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) mean += atoms[i] * probs[i];
  if (mean > 1.0) {
    const double keep = 1.0 / mean;
    for (double& p : probs) p *= keep;
    probs.front() += 1.0 - keep;
  }
  double fix = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) fix += probs[i];
  probs.back() = std::max(0.0, 1.0 - fix);
  return DiscreteDistribution(std::move(atoms), std::move(probs));
}

}  // namespace

TEST_CASE("worst-case expectation of the max merger is the antithetic value") {
  GridFunction f = max_grid(2.0, 2, {0, 1, 2});
  std::vector<DiscreteDistribution> marginals{
      DiscreteDistribution({0, 2}, {0.5, 0.5}),
      DiscreteDistribution({0, 2}, {0.5, 0.5})};
  auto cert = transport::worst_case_expectation(f, marginals);
  CHECK(cert.primal_value == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(cert.verdict == transport::Verdict::invalid);
  CHECK(std::fabs(cert.gap) <= 1e-6);
  CHECK(cert.gap >= -1e-8);

  // The optimum is the antithetic coupling, and it is unique here.
  REQUIRE(cert.coupling.entries().size() == 2);
  for (const auto& entry : cert.coupling.entries()) {
    CHECK(entry.mass == doctest::Approx(0.5));
    CHECK(entry.index[0] != entry.index[1]);
  }

  // Oracle agreement.
  oracle::SmallInstance inst(f, marginals);
  CHECK(std::fabs(oracle::enumerate_couplings_value(inst) -
                  cert.primal_value) <= 1e-8);
}

TEST_CASE("affine mergers have dependence-free expectations") {
  Weights lambda({0.5, 0.3, 0.2});
  GridFunction f = grid_sample(
      [&](std::span<const double> e) {
        return weighted_merge(lambda, EValueVector({e[0], e[1]}));
      },
      2.0, {{0, 1, 2}, {0, 1, 2}});
  std::vector<DiscreteDistribution> marginals{
      DiscreteDistribution({0, 2}, {0.5, 0.5}),
      DiscreteDistribution({0, 1}, {0.5, 0.5})};
  auto cert = transport::worst_case_expectation(f, marginals);
  CHECK(cert.primal_value == doctest::Approx(0.85).epsilon(1e-10));
  CHECK(cert.verdict == transport::Verdict::valid);
}

TEST_CASE("single marginal instances reduce to plain expectations") {
  GridFunction f = max_grid(2.0, 1, {0, 1, 2});
  std::vector<DiscreteDistribution> marginals{
      DiscreteDistribution::point_mass(1.0)};
  auto cert = transport::worst_case_expectation(f, marginals);
  CHECK(cert.primal_value == doctest::Approx(1.0));
  CHECK(cert.coupling.entries().size() == 1);
  CHECK(cert.coupling.entries()[0].mass == doctest::Approx(1.0));
}

TEST_CASE("duality gap and weak duality on random instances") {
  rng::SplitMix64 gen(31337);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t arity = 1 + gen.index(3);
    std::vector<double> axis{0.0, 0.5, 1.0, 2.0};
    std::vector<std::vector<double>> axes(arity, axis);
    GridFunction f = random_monotone_grid(gen, 2.0, axes);
    std::vector<DiscreteDistribution> marginals;
    for (std::size_t k = 0; k < arity; ++k) {
      marginals.push_back(random_evalue_law(gen, axis, 4));
    }
    auto cert = transport::worst_case_expectation(f, marginals);
    CHECK(cert.gap >= -1e-8);
    CHECK(std::fabs(cert.gap) <= 1e-6);
    CHECK(cert.dual.min_domination_slack() >= -1e-9);
    // The coupling's expectation reproduces the primal value.
    CHECK(std::fabs(cert.coupling.expectation_on_grid(f) - cert.primal_value) <=
          1e-9);

    if (arity == 2) {
      oracle::SmallInstance inst(f, marginals);
      CHECK(std::fabs(oracle::enumerate_couplings_value(inst) -
                      cert.primal_value) <= 1e-8);
    }
  }
}

TEST_CASE("optimal couplings give dependence-free weighted-average means") {
  rng::SplitMix64 gen(2025);
  std::vector<double> axis{0.0, 0.5, 1.0, 2.0};
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t arity = 1 + gen.index(3);
    std::vector<std::vector<double>> axes(arity, axis);
    GridFunction f = random_monotone_grid(gen, 2.0, axes);
    std::vector<DiscreteDistribution> marginals;
    for (std::size_t k = 0; k < arity; ++k) {
      marginals.push_back(random_evalue_law(gen, axis, 4));
    }
    auto cert = transport::worst_case_expectation(f, marginals);

    std::vector<double> w(arity + 1);
    double sum = 0.0;
    for (double& v : w) {
      v = gen.exponential() + 1e-3;
      sum += v;
    }
    for (double& v : w) v /= sum;
    double fix = 0.0;
    for (std::size_t i = 0; i < arity; ++i) fix += w[i];
    w.back() = 1.0 - fix;
    Weights lambda(w);
    // The merged mean under the solver's coupling depends only on the
    // marginal means.
    double expected = lambda.constant_weight();
    for (std::size_t k = 0; k < arity; ++k) {
      expected += lambda.entry(k) * cert.coupling.marginals()[k].mean();
    }
    const double merged =
        cert.coupling.expectation([&](std::span<const double> e) {
          return weighted_merge(lambda, EValueVector({e.begin(), e.end()}));
        });
    CHECK(std::fabs(merged - expected) <= 1e-10);
  }
}

TEST_CASE("worst_case_expectation rejects bad marginals") {
  GridFunction f = max_grid(2.0, 2, {0, 1, 2});
  std::vector<DiscreteDistribution> heavy{
      DiscreteDistribution({0, 2}, {0.1, 0.9}),  // mean 1.8
      DiscreteDistribution({0, 2}, {0.5, 0.5})};
  CHECK_THROWS_AS(transport::worst_case_expectation(f, heavy),
                  std::invalid_argument);
  std::vector<DiscreteDistribution> off_axis{
      DiscreteDistribution({0, 0.7}, {0.5, 0.5}),
      DiscreteDistribution({0, 2}, {0.5, 0.5})};
  CHECK_THROWS_AS(transport::worst_case_expectation(f, off_axis),
                  AlignmentError);
}

TEST_CASE("symmetric targets are invariant under marginal permutation") {
  rng::SplitMix64 gen(555);
  std::vector<double> axis{0.0, 0.5, 1.0, 2.0};
  GridFunction f = max_grid(2.0, 2, axis);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<DiscreteDistribution> marginals{
        random_evalue_law(gen, axis, 4), random_evalue_law(gen, axis, 4)};
    std::vector<DiscreteDistribution> swapped{marginals[1], marginals[0]};
    auto a = transport::worst_case_expectation(f, marginals);
    auto b = transport::worst_case_expectation(f, swapped);
    CHECK(std::fabs(a.primal_value - b.primal_value) <= 1e-10);
  }
}

TEST_CASE("marginals whose atoms cover only part of the axis still certify") {
  GridFunction f = max_grid(2.0, 2, {0, 0.5, 1, 2});
  std::vector<DiscreteDistribution> marginals{
      DiscreteDistribution({0, 2}, {0.5, 0.5}),
      DiscreteDistribution({0.5, 1}, {0.5, 0.5})};
  auto cert = transport::worst_case_expectation(f, marginals);
  // The dual tables must dominate on the whole product grid, including the
  // axis points the marginals never touch.
  CHECK(cert.dual.min_domination_slack() >= -1e-9);
  CHECK(std::fabs(cert.gap) <= 1e-6);
  oracle::SmallInstance inst(f, marginals);
  CHECK(std::fabs(oracle::enumerate_couplings_value(inst) - cert.primal_value) <=
        1e-8);
}

TEST_CASE("binary adversary on the worked examples") {
  GridFunction prod = grid_sample(
      [](std::span<const double> e) { return e[0] * e[1]; }, 2.0,
      {{0, 1, 2}, {0, 1, 2}});
  auto hit = transport::binary_adversary(prod, EValueVector({2, 2}));
  CHECK(hit.expectation == doctest::Approx(2.0));
  for (const auto& mu : hit.marginals) {
    CHECK(mu.mean() <= 1.0 + 1e-12);
    CHECK(mu.probs() == std::vector<double>{0.5, 0.5});
  }

  GridFunction f = max_grid(3.0, 2, {0, 1, 2, 3});
  auto boundary = transport::binary_adversary(f, EValueVector({3, 2}));
  CHECK(boundary.expectation == doctest::Approx(1.0));

  CHECK_THROWS_AS(transport::binary_adversary(f, EValueVector({1, 0.5})),
                  std::domain_error);
}

TEST_CASE("binary adversary of a weighted average stays below 1") {
  rng::SplitMix64 gen(17);
  std::vector<double> axis{0, 0.5, 1, 2, 4};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> w(3);
    double sum = 0.0;
    for (double& v : w) {
      v = gen.exponential() + 1e-3;
      sum += v;
    }
    for (double& v : w) v /= sum;
    w[2] = 1.0 - w[0] - w[1];
    Weights lambda(w);
    GridFunction f = grid_sample(
        [&](std::span<const double> e) {
          return weighted_merge(lambda, EValueVector({e[0], e[1]}));
        },
        4.0, {axis, axis});
    const double e1 = axis[1 + gen.index(4)];
    const double e2 = axis[1 + gen.index(4)];
    if (std::max(e1, e2) <= 1.0) continue;
    auto adv = transport::binary_adversary(f, EValueVector({e1, e2}));
    const double top = std::max(e1, e2);
    const double expected =
        weighted_merge(lambda, EValueVector({e1, e2})) / top +
        lambda.constant_weight() * (1.0 - 1.0 / top);
    CHECK(adv.expectation == doctest::Approx(expected).epsilon(1e-12));
    CHECK(adv.expectation <= 1.0 + 1e-12);
  }
}

TEST_CASE("normalize_dual shifts, clamps and preserves sub-1 integrals") {
  // Target bounded by 1 and dominated by (x - 5) + 5.
  std::vector<double> axis{0, 0.5, 1, 2};
  GridFunction f = grid_sample(
      [](std::span<const double> e) { return std::min(e[0], 1.0); }, 2.0,
      {axis, axis});
  std::vector<std::vector<double>> tables{
      {0 - 5, 0.5 - 5, 1 - 5, 2 - 5}, {5, 5, 5, 5}};
  transport::SeparableDual dual(tables, f);
  auto normalized = transport::normalize_dual(dual, f);
  CHECK(normalized.normalized());
  CHECK(normalized.component(0) ==
        std::vector<double>{0.0, 0.5, 1.0, 1.0});  // min(x, 1) after clamping
  CHECK(normalized.component(1) == std::vector<double>{0.0, 0.0, 0.0, 0.0});

  // The shift leaves marginal-sum integrals unchanged; with atoms below 1
  // the clamp is inactive, so the equality is exact end to end.
  std::vector<DiscreteDistribution> marginals{
      DiscreteDistribution({0, 0.5, 1}, {0.25, 0.5, 0.25}),
      DiscreteDistribution({0, 1}, {0.5, 0.5})};
  CHECK(normalized.marginal_sum_integral(marginals) ==
        doctest::Approx(dual.marginal_sum_integral(marginals)).epsilon(1e-14));
}

TEST_CASE("normalize_dual fixed point and zero case") {
  std::vector<double> axis{0, 1, 2};
  GridFunction ones = grid_sample(
      [](std::span<const double>) { return 1.0; }, 2.0, {axis, axis});
  std::vector<std::vector<double>> half{{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
  transport::SeparableDual dual(half, ones);
  auto normalized = transport::normalize_dual(dual, ones);
  CHECK(normalized.components() == half);

  GridFunction zeros = grid_sample(
      [](std::span<const double>) { return 0.0; }, 2.0, {axis, axis});
  std::vector<std::vector<double>> zphi{{0, 0, 0}, {0, 0, 0}};
  auto znorm = transport::normalize_dual(transport::SeparableDual(zphi, zeros),
                                         zeros);
  CHECK(znorm.components() == zphi);
}

TEST_CASE("normalize_dual rejects non-dominating inputs") {
  std::vector<double> axis{0, 1, 2};
  GridFunction ones = grid_sample(
      [](std::span<const double>) { return 1.0; }, 2.0, {axis, axis});
  std::vector<std::vector<double>> low{{0.2, 0.2, 0.2}, {0.2, 0.2, 0.2}};
  CHECK_THROWS_AS(transport::SeparableDual(low, ones),
                  transport::FeasibilityError);
}
