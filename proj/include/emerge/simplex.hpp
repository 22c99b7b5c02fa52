#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

// Dense two-phase primal simplex for the small linear programs behind the
// transport and domination modules. Dantzig pricing with a permanent switch
// to Bland's rule on stalling, so degenerate instances cannot cycle. Duals
// are read from the optimal basis.
namespace emerge::lp {

enum class Relation { le, ge, eq };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Constraint {
  std::vector<double> coeffs;
  Relation rel = Relation::eq;
  double rhs = 0.0;
};

// min objective . x  subject to the constraints and x >= 0.
struct Problem {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> constraints;
};

struct Options {
  double tol = 1e-9;
  std::size_t max_iterations = 0;  // 0 = automatic budget
};

struct Solution {
  Status status = Status::optimal;
  double objective = 0.0;
  std::vector<double> x;
  // One multiplier per constraint: >= 0 for ge rows, <= 0 for le rows, free
  // for eq rows; objective == sum duals[i] * rhs[i] at an optimum.
  std::vector<double> duals;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t iterations = 0;
};

// Thrown by callers when a solve does not reach optimality; carries the best
// primal/dual information available at termination.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string message, Status status, double primal_bound,
              double dual_bound)
      : std::runtime_error(std::move(message)),
        status_(status),
        primal_bound_(primal_bound),
        dual_bound_(dual_bound) {}

  Status status() const { return status_; }
  double primal_bound() const { return primal_bound_; }
  double dual_bound() const { return dual_bound_; }

 private:
  Status status_;
  double primal_bound_;
  double dual_bound_;
};

Solution minimize(const Problem& problem, const Options& options = {});

}  // namespace emerge::lp
