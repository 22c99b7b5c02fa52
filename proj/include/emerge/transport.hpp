#pragma once

#include <span>
#include <vector>

#include "emerge/core.hpp"
#include "emerge/simplex.hpp"

// Discrete multi-marginal optimal transport over e-variable marginals:
// worst-case expectations, separable dual majorants with duality-gap
// certificates, and the explicit two-point adversary.
namespace emerge::transport {

enum class Verdict { valid, invalid, boundary };

// Thrown when a claimed separable majorant does not dominate the target.
class FeasibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// K univariate functions phi_k on the axes of a reference grid function
// whose coordinatewise sum dominates it everywhere on the product grid.
class SeparableDual {
 public:
  SeparableDual(std::vector<std::vector<double>> phi, const GridFunction& f,
                bool normalized = false);

  std::size_t arity() const { return phi_.size(); }
  const std::vector<double>& component(std::size_t k) const {
    return phi_.at(k);
  }
  const std::vector<std::vector<double>>& components() const { return phi_; }
  bool normalized() const { return normalized_; }
  // Smallest value of (sum phi_k) - f over the grid; >= -1e-9 by invariant.
  double min_domination_slack() const { return min_slack_; }

  // Sum over k of the integral of phi_k against the k-th marginal; the
  // marginal atoms must sit on the reference axes.
  double marginal_sum_integral(
      std::span<const DiscreteDistribution> marginals) const;

 private:
  std::vector<std::vector<double>> phi_;
  std::vector<std::vector<double>> axes_;
  bool normalized_ = false;
  double min_slack_ = 0.0;
};

// Primal/dual pair for one worst-case expectation solve.
struct TransportCertificate {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // dual - primal
  Coupling coupling;
  SeparableDual dual;
  Verdict verdict = Verdict::boundary;
  double lp_primal_residual = 0.0;
  double lp_dual_residual = 0.0;
  std::size_t lp_iterations = 0;
};

// Solves max over couplings of the marginals of the expectation of f; the
// primal value is the supremum of E[f(E_1,...,E_K)] over all dependence
// structures with the given marginals. The optimal coupling and a separable
// dual majorant certify the value from both sides.
//
// Marginal atoms must lie on the corresponding axes of f and each marginal
// must have mean at most 1. The verdict compares the primal value against
// 1 + verdict_tol, with values within verdict_tol of 1 reported as boundary.
TransportCertificate worst_case_expectation(
    const GridFunction& f, std::span<const DiscreteDistribution> marginals,
    double verdict_tol = kLpTol);

// The two-point joint law placing mass 1/max(e) at e and the rest at the
// origin. Each marginal has mean at most 1, and the expectation of f under
// it exceeds 1 whenever f(e) > max(1, max(e)) and f(0) >= 0.
struct AdversaryResult {
  std::vector<DiscreteDistribution> marginals;
  Coupling coupling;
  double expectation = 0.0;
};
AdversaryResult binary_adversary(const GridFunction& f, const EValueVector& e);

// Shifts the components so all are nonnegative without changing any
// marginal-sum integral, then clamps them to [0, 1]. Requires f (and the
// dual) rescaled so that f is bounded by 1; domination is preserved.
SeparableDual normalize_dual(const SeparableDual& phi, const GridFunction& f);

}  // namespace emerge::transport
