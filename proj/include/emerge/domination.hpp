#pragma once

#include <span>
#include <utility>
#include <vector>

#include "emerge/core.hpp"

// Constructive domination: every grid function that survives the worst-case
// expectation checks is bounded by (1 + epsilon) times a weighted average of
// its inputs and the constant 1, and the weights are extracted here.
namespace emerge::domination {

// Largest integral of a univariate grid table over laws on the grid with
// mean at most 1, plus a law attaining it. The feasible set's extreme
// points carry at most two atoms, so the enumeration is exact: single atoms
// x <= 1 and pairs x < 1 < y mixed to mean exactly 1.
struct MeanConstrainedSup {
  double value = 0.0;
  DiscreteDistribution attaining;
};
MeanConstrainedSup sup_mean_constrained(std::span<const double> axis,
                                        std::span<const double> values);

// Affine bound r * (1 - h + h x) over a univariate table, with the feasible
// slope interval [h_min, h_max] and the chosen slope h = h_min.
struct MajorantResult {
  double r = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  double h = 0.0;
  double theta = 1.0;
};

// Raised when no feasible slope exists; carries a one- or two-point law
// whose expectation of the table exceeds r, certifying that the
// mean-constrained supremum is larger than r.
class MajorantInfeasibleError : public std::runtime_error {
 public:
  MajorantInfeasibleError(std::string message, DiscreteDistribution adversary,
                          double expectation, double bound)
      : std::runtime_error(std::move(message)),
        adversary_(std::move(adversary)),
        expectation_(expectation),
        bound_(bound) {}

  const DiscreteDistribution& adversary() const { return adversary_; }
  double expectation() const { return expectation_; }
  double bound() const { return bound_; }

 private:
  DiscreteDistribution adversary_;
  double expectation_;
  double bound_;
};

MajorantResult linear_majorant(std::span<const double> axis,
                               std::span<const double> values, double r);

// Raised by dominate when the target fails a validity check; carries the
// certifying marginal tuple and the worst-case expectation it achieves.
class NotValidError : public std::runtime_error {
 public:
  NotValidError(std::string message,
                std::vector<DiscreteDistribution> marginals,
                double worst_expectation)
      : std::runtime_error(std::move(message)),
        marginals_(std::move(marginals)),
        worst_expectation_(worst_expectation) {}

  const std::vector<DiscreteDistribution>& marginals() const {
    return marginals_;
  }
  double worst_expectation() const { return worst_expectation_; }

 private:
  std::vector<DiscreteDistribution> marginals_;
  double worst_expectation_;
};

struct DominationReport {
  Weights lambda;
  double epsilon = 0.0;
  double theta = 1.0;
  // max over the grid of f - (1 + epsilon) * M_lambda; <= 1e-8 on success.
  double max_violation = 0.0;
  // Per input: the mean-constrained bound T_k and the chosen slope h_k.
  std::vector<std::pair<double, double>> per_k;
  double sum_T = 0.0;
};

struct DominateOptions {
  // Check the adversarial family (per-axis point mass at 1 plus all
  // two-point mean-1 grid laws) before the joint solve.
  bool check_family = true;
  // Replace the family with caller-specified marginal tuples.
  std::vector<std::vector<DiscreteDistribution>> family;
  // Equalize the per-axis components for symmetric targets.
  bool symmetrize = true;
  double validity_tol = kLpTol;
};

// Pipeline: (1) solve the joint LP for nonnegative per-axis tables whose sum
// dominates f with the smallest total mean-constrained bound; (2) fit the
// affine majorant of each table; (3) assemble the weights; (4) verify
// f <= (1 + epsilon) * M_lambda on the whole grid.
DominationReport dominate(const GridFunction& f, double epsilon,
                          const DominateOptions& options = {});

// Extreme laws of the mean-constrained set on a grid axis: point masses at
// atoms <= 1 and two-point laws x < 1 < y mixed to mean exactly 1.
std::vector<DiscreteDistribution> extreme_axis_laws(
    std::span<const double> axis);

// The default adversarial laws used by dominate's precheck: the point mass
// at 1 plus the two-point mean-1 laws.
std::vector<DiscreteDistribution> adversarial_axis_laws(
    std::span<const double> axis);

}  // namespace emerge::domination
