// Acceptance suite: every criterion prints one pass/fail line; the binary
// exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "emerge/core.hpp"
#include "emerge/domination.hpp"
#include "emerge/oracle.hpp"
#include "emerge/rng.hpp"
#include "emerge/scenario.hpp"
#include "emerge/subclasses.hpp"
#include "emerge/transport.hpp"

using namespace emerge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

Weights random_simplex(rng::SplitMix64& gen, std::size_t entries) {
  std::vector<double> w(entries);
  double sum = 0.0;
  for (double& v : w) {
    v = gen.exponential() + 1e-3;
    sum += v;
  }
  for (double& v : w) v /= sum;
  double fix = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) fix += w[i];
  w.back() = 1.0 - fix;
  return Weights(w);
}

// Minima and mixtures of weighted averages: valid by construction.
GridFunction random_valid_target(rng::SplitMix64& gen, double theta,
                                 const std::vector<double>& axis,
                                 std::size_t arity) {
  const std::size_t pieces = 1 + gen.index(3);
  std::vector<Weights> lambdas;
  for (std::size_t i = 0; i < pieces; ++i) {
    lambdas.push_back(random_simplex(gen, arity + 1));
  }
  const bool mixture = gen.uniform01() < 0.5;
  std::vector<double> mix(pieces, 1.0 / static_cast<double>(pieces));
  std::vector<std::vector<double>> axes(arity, axis);
  return grid_sample(
      [&](std::span<const double> e) {
        EValueVector ev({e.begin(), e.end()});
        if (mixture) {
          double total = 0.0;
          for (std::size_t i = 0; i < pieces; ++i) {
            total += mix[i] * weighted_merge(lambdas[i], ev);
          }
          return total;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& lambda : lambdas) {
          best = std::min(best, weighted_merge(lambda, ev));
        }
        return best;
      },
      theta, std::move(axes));
}

GridFunction random_monotone_grid(rng::SplitMix64& gen, double theta,
                                  std::vector<std::vector<double>> axes) {
  std::size_t total = 1;
  for (const auto& axis : axes) total *= axis.size();
  GridFunction shape(theta, axes, std::vector<double>(total, 0.0));
  std::vector<double> values(total, 0.0);
  std::vector<std::size_t> idx(axes.size());
  for (std::size_t flat = 0; flat < total; ++flat) {
    shape.unflatten(flat, idx);
    double v = 2.0 * gen.uniform01();
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
  picks.front() = 0;  // keep the zero atom available for mass dumping
  std::vector<double> atoms, probs;
  for (std::size_t i : picks) atoms.push_back(axis[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    probs.push_back(gen.exponential() + 0.05);
    sum += probs.back();
  }
  for (double& p : probs) p /= sum;
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

// --- criteria -------------------------------------------------------------

Outcome criterion_grid_scale_domination() {
  const auto start = std::chrono::steady_clock::now();
  rng::SplitMix64 gen(101);
  const std::vector<double> axis{0, 1, 2, 3, 4};
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction f = random_valid_target(gen, 4.0, axis, 2);
    domination::DominationReport report = domination::dominate(f, 1e-3);
    if (report.max_violation > 1e-8) {
      return {false, "max_violation above 1e-8 on trial " +
                         std::to_string(trial)};
    }
    std::vector<std::size_t> idx(2);
    for (std::size_t flat = 0; flat < f.node_count(); ++flat) {
      f.unflatten(flat, idx);
      auto p = f.point(idx);
      const double merged =
          weighted_merge(report.lambda, EValueVector({p[0], p[1]}));
      if (f.value_flat(flat) > (1.0 + 1e-3) * merged + 1e-8) {
        return {false, "pointwise domination failed on trial " +
                           std::to_string(trial)};
      }
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed > 60.0) {
    return {false, "runtime above 60 s"};
  }
  std::ostringstream detail;
  detail << "20 targets dominated, " << elapsed << " s";
  return {true, detail.str()};
}

Outcome criterion_invalidity_detection() {
  const auto start = std::chrono::steady_clock::now();
  GridFunction f = grid_sample(
      [](std::span<const double> e) { return std::max(e[0], e[1]); }, 2.0,
      {{0, 1, 2}, {0, 1, 2}});
  std::vector<DiscreteDistribution> marginals{
      DiscreteDistribution({0, 2}, {0.5, 0.5}),
      DiscreteDistribution({0, 2}, {0.5, 0.5})};
  auto cert = transport::worst_case_expectation(f, marginals);
  oracle::SmallInstance inst(f, marginals);
  const double reference = oracle::enumerate_couplings_value(inst);
  const double elapsed = seconds_since(start);
  const bool pass = std::fabs(cert.primal_value - 2.0) <= 1e-8 &&
                    std::fabs(cert.primal_value - reference) <= 1e-8 &&
                    cert.verdict == transport::Verdict::invalid &&
                    elapsed < 1.0;
  std::ostringstream detail;
  detail << "primal " << cert.primal_value << ", oracle " << reference << ", "
         << elapsed << " s";
  return {pass, detail.str()};
}

Outcome criterion_duality_gap() {
  const auto start = std::chrono::steady_clock::now();
  rng::SplitMix64 gen(303);
  const std::vector<double> axis{0, 0.5, 1, 2};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t arity = 1 + gen.index(3);
    std::vector<std::vector<double>> axes(arity, axis);
    GridFunction f = random_monotone_grid(gen, 2.0, axes);
    std::vector<DiscreteDistribution> marginals;
    for (std::size_t k = 0; k < arity; ++k) {
      marginals.push_back(random_evalue_law(gen, axis, 4));
    }
    auto cert = transport::worst_case_expectation(f, marginals);
    if (cert.gap < -1e-8) {
      return {false, "weak duality violated on trial " + std::to_string(trial)};
    }
    if (std::fabs(cert.gap) > 1e-6) {
      return {false, "duality gap above 1e-6 on trial " + std::to_string(trial)};
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed > 30.0) {
    return {false, "runtime above 30 s"};
  }
  std::ostringstream detail;
  detail << "50 instances within gap tolerance, " << elapsed << " s";
  return {true, detail.str()};
}

Outcome criterion_majorant_oracle() {
  rng::SplitMix64 gen(404);
  const std::vector<double> axis{0, 0.25, 0.5, 1, 1.5, 2, 4};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> values(axis.size());
    for (double& v : values) v = 3.0 * gen.uniform01();
    const auto sup = domination::sup_mean_constrained(axis, values);
    const double reference = oracle::enumerate_binary_mean_laws(axis, values);
    if (std::fabs(sup.value - reference) > 1e-9) {
      return {false, "supremum mismatch on trial " + std::to_string(trial)};
    }
    const auto majorant = domination::linear_majorant(axis, values, sup.value);
    if (majorant.h_min > majorant.h_max + 1e-9) {
      return {false, "empty slope interval on trial " + std::to_string(trial)};
    }
    for (std::size_t i = 0; i < axis.size(); ++i) {
      const double bound =
          sup.value * (1.0 - majorant.h + majorant.h * axis[i]);
      if (values[i] > bound + 1e-9) {
        return {false, "majorant bound broken on trial " +
                           std::to_string(trial)};
      }
    }
  }
  return {true, "100 tables: oracle agreement and feasible slopes"};
}

Outcome criterion_dependence_free_mean() {
  rng::SplitMix64 gen(505);
  const std::vector<double> axis{0, 0.5, 1, 2};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t arity = 1 + gen.index(3);
    Weights lambda = random_simplex(gen, arity + 1);
    std::vector<DiscreteDistribution> marginals;
    std::vector<std::vector<std::size_t>> orders;
    for (std::size_t k = 0; k < arity; ++k) {
      marginals.push_back(random_evalue_law(gen, axis, 4));
      std::vector<std::size_t> order(marginals.back().size());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[gen.index(i)]);
      }
      orders.push_back(std::move(order));
    }
    Coupling coupling = oracle::greedy_coupling(marginals, orders);
    const double merged = coupling.expectation([&](std::span<const double> e) {
      return weighted_merge(lambda, EValueVector({e.begin(), e.end()}));
    });
    double expected = lambda.constant_weight();
    for (std::size_t k = 0; k < arity; ++k) {
      expected += lambda.entry(k) * marginals[k].mean();
    }
    if (std::fabs(merged - expected) > 1e-10) {
      return {false, "dependence-free mean broken on trial " +
                         std::to_string(trial)};
    }
  }
  return {true, "20 couplings: expectation equals the weighted marginal means"};
}

Outcome criterion_exchangeable_bound() {
  const auto start = std::chrono::steady_clock::now();
  subclasses::PermutationSampler sampler({0.0, 0.5, 1.0, 1.5, 2.0});
  std::ostringstream detail;
  for (double beta : {1.5, 2.0, 5.0}) {
    auto indicator = [beta](const std::vector<double>& e) {
      return subclasses::exchangeable_merge(beta, EValueVector(e)) > 0.0
                 ? 1.0
                 : 0.0;
    };
    auto mc = subclasses::mc_mean(indicator, sampler, 1000000, 777);
    if (mc.estimate > 1.0 / beta + 3.0 * mc.std_error) {
      return {false, "tail probability above the Markov bound at beta " +
                         std::to_string(beta)};
    }
    detail << "beta " << beta << ": " << mc.estimate << " <= " << 1.0 / beta
           << " + 3 s.e.; ";
  }
  Weights uniform(std::vector<double>(6, 1.0 / 6.0));
  const std::vector<double> candidates{0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0};
  auto witnesses =
      subclasses::incomparability_witnesses(2.0, uniform, candidates);
  if (!witnesses) {
    return {false, "no incomparability witnesses found"};
  }
  const double elapsed = seconds_since(start);
  if (elapsed > 120.0) {
    return {false, "runtime above 120 s"};
  }
  detail << "witnesses found, " << elapsed << " s";
  return {true, detail.str()};
}

Outcome criterion_full_support_observation() {
  const auto start = std::chrono::steady_clock::now();
  Weights lambda({0.5, 0.5, 0.0});
  auto rule = [&](const std::vector<double>& e) {
    return weighted_merge(lambda, EValueVector(e));
  };
  auto improvement = [&](const std::vector<double>& e) {
    return weighted_merge(lambda, EValueVector(e)) + (e[0] > 1.0 ? 0.05 : 0.0);
  };
  subclasses::IidExponentialSampler sampler(2);
  auto report = subclasses::full_support_admissibility_check(
      rule, improvement, sampler, 1000000, 888);
  const double elapsed = seconds_since(start);
  const double guaranteed_excess = 0.05 * std::exp(-1.0);
  const double floor =
      1.0 + guaranteed_excess - 3.0 * report.improvement_estimate.std_error;
  const bool pass =
      report.verdict == subclasses::AdmissibilityVerdict::improvement_rejected &&
      report.improvement_estimate.estimate >= floor && floor > 1.0 &&
      elapsed <= 60.0;
  std::ostringstream detail;
  detail << "estimate " << report.improvement_estimate.estimate << " >= "
         << floor << " > 1, " << elapsed << " s";
  return {pass, detail.str()};
}

Outcome criterion_self_domination() {
  rng::SplitMix64 gen(606);
  const std::vector<double> axis{0, 1, 2, 3, 4};
  for (int trial = 0; trial < 10; ++trial) {
    Weights lambda = random_simplex(gen, 3);
    GridFunction f = grid_sample(
        [&](std::span<const double> e) {
          return weighted_merge(lambda, EValueVector({e[0], e[1]}));
        },
        4.0, {axis, axis});
    auto report = domination::dominate(f, 1e-3);
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::fabs(report.lambda.entry(i) - lambda.entry(i)) > 0.01) {
        return {false, "recovery above 0.01 on trial " + std::to_string(trial)};
      }
    }
  }

  // The recovery error shrinks down the epsilon ladder.
  Weights fixed({0.5, 0.2, 0.3});
  GridFunction f = grid_sample(
      [&](std::span<const double> e) {
        return weighted_merge(fixed, EValueVector({e[0], e[1]}));
      },
      4.0, {axis, axis});
  double previous = std::numeric_limits<double>::infinity();
  for (double epsilon : {1e-1, 1e-2, 1e-3}) {
    auto report = domination::dominate(f, epsilon);
    double err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      err = std::max(err, std::fabs(report.lambda.entry(i) - fixed.entry(i)));
    }
    if (err > previous + 1e-9) {
      return {false, "recovery error increased down the epsilon ladder"};
    }
    previous = err;
  }
  return {true, "10 recoveries within 0.01; ladder errors nonincreasing"};
}

Outcome criterion_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "emerge_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path scenario_path = dir / "scenario.json";
  {
    std::ofstream out(scenario_path);
    out << R"({
  "kind": "simulate",
  "rule": {"id": "exchangeable", "beta": 2.0, "arity": 5},
  "sampler": {"id": "permutation", "base": [0.0, 0.5, 1.0, 1.5, 2.0]},
  "replications": 100000,
  "seed": 42
})";
  }
  const int a = cli::run(scenario_path, dir / "a");
  const int b = cli::run(scenario_path, dir / "b");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  const std::string first = slurp(dir / "a" / "report.json");
  const std::string second = slurp(dir / "b" / "report.json");
  fs::remove_all(dir);
  if (a != 0 || b != 0) {
    return {false, "simulate runs did not exit cleanly"};
  }
  if (first.empty() || first != second) {
    return {false, "reports differ between identical runs"};
  }
  return {true, "byte-identical report.json across two runs"};
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> criteria{
      {"grid-scale domination of 20 random valid targets",
       criterion_grid_scale_domination},
      {"invalidity of the max merger at the antithetic coupling",
       criterion_invalidity_detection},
      {"duality gap within 1e-6 on 50 random instances",
       criterion_duality_gap},
      {"mean-constrained supremum oracle and slope intervals",
       criterion_majorant_oracle},
      {"dependence-free mean of weighted averages",
       criterion_dependence_free_mean},
      {"exchangeable running-average bound and incomparability",
       criterion_exchangeable_bound},
      {"full-support rejection of strict improvements",
       criterion_full_support_observation},
      {"self-domination weight recovery and epsilon ladder",
       criterion_self_domination},
      {"byte-identical seeded simulation reports",
       criterion_reproducibility},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& err) {
      outcome = {false, std::string("exception: ") + err.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("[%s] criterion %zu: %s (%s)\n",
                outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].label,
                outcome.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
