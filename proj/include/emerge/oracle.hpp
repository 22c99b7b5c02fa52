#pragma once

#include <span>
#include <vector>

#include "emerge/core.hpp"

// Brute-force reference computations for small instances, kept independent
// of the LP path so the two can certify each other.
namespace emerge::oracle {

// A grid function with at most 3 marginals of at most 4 atoms each.
struct SmallInstance {
  GridFunction f;
  std::vector<DiscreteDistribution> marginals;

  SmallInstance(GridFunction f, std::vector<DiscreteDistribution> marginals);
};

// Largest expectation of f over couplings of the marginals.
//
// K = 1 has a unique coupling. K = 2 enumerates every vertex of the
// transportation polytope by exhaustive spanning-tree bases. K = 3 builds
// the greedy corner coupling for every triple of axis orderings and then
// refines the best one by exhaustive two-cell mass swaps; this is a lower
// bound in general and exact whenever the optimum is reachable that way.
double enumerate_couplings_value(const SmallInstance& instance,
                                 unsigned refinement_passes = 8);

// Largest value of the integral of a univariate grid function over laws on
// the grid with mean at most 1: all single atoms x <= 1, all two-atom laws
// x < 1 < y mixed to mean exactly 1, and (dominated, for completeness)
// two-atom laws below 1 at a fixed set of mixture weights.
double enumerate_binary_mean_laws(std::span<const double> axis,
                                  std::span<const double> values);

// Greedy corner coupling in the lexicographic order induced by the given
// per-marginal atom orders; feasible for any orders by construction.
Coupling greedy_coupling(
    std::vector<DiscreteDistribution> marginals,
    const std::vector<std::vector<std::size_t>>& atom_orders);

}  // namespace emerge::oracle
