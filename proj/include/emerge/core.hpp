#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types for merging e-values: weight vectors on the simplex,
// grid-sampled merging functions, discrete marginal laws, and couplings.
namespace emerge {

// Absolute tolerances, coarsest to finest: LP-derived quantities, coupling
// and marginal consistency, pure floating-point identities.
inline constexpr double kLpTol = 1e-6;
inline constexpr double kCouplingTol = 1e-10;
inline constexpr double kArithmeticTol = 1e-12;
// Grid samples are rejected as non-monotone only beyond this slack.
inline constexpr double kMonotoneTol = 1e-9;

// Thrown when a value that must sit on a grid axis (or match an atom list)
// cannot be matched.
class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown by GridFunction construction when values decrease along an axis by
// more than kMonotoneTol. Carries the witnessing pair of grid nodes.
class MonotonicityError : public std::runtime_error {
 public:
  MonotonicityError(std::string message, std::vector<std::size_t> lower_index,
                    std::vector<std::size_t> upper_index, double lower_value,
                    double upper_value);

  const std::vector<std::size_t>& lower_index() const { return lower_index_; }
  const std::vector<std::size_t>& upper_index() const { return upper_index_; }
  double lower_value() const { return lower_value_; }
  double upper_value() const { return upper_value_; }

 private:
  std::vector<std::size_t> lower_index_;
  std::vector<std::size_t> upper_index_;
  double lower_value_;
  double upper_value_;
};

// A point of the simplex: K nonnegative weights for the inputs plus one for
// the constant 1, summing to one.
class Weights {
 public:
  explicit Weights(std::vector<double> entries);

  // Number of merged inputs (one less than the entry count).
  std::size_t arity() const { return entries_.size() - 1; }
  double entry(std::size_t i) const { return entries_.at(i); }
  double constant_weight() const { return entries_.back(); }
  const std::vector<double>& entries() const { return entries_; }

 private:
  std::vector<double> entries_;
};

// A vector of K nonnegative finite e-values.
class EValueVector {
 public:
  explicit EValueVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  double max() const;

 private:
  std::vector<double> values_;
};

// A candidate merging function evaluated on a finite product grid in
// [0, theta]^K. Every axis is strictly increasing and contains 0, 1 and
// theta; values are nonnegative and nondecreasing along every axis.
class GridFunction {
 public:
  GridFunction(double theta, std::vector<std::vector<double>> axes,
               std::vector<double> values);

  std::size_t arity() const { return axes_.size(); }
  double theta() const { return theta_; }
  const std::vector<double>& axis(std::size_t k) const { return axes_.at(k); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t node_count() const { return values_.size(); }

  std::size_t flatten(std::span<const std::size_t> index) const;
  void unflatten(std::size_t flat, std::span<std::size_t> index) const;
  double value_at(std::span<const std::size_t> index) const;
  double value_flat(std::size_t flat) const { return values_[flat]; }
  // Coordinates of a grid node.
  std::vector<double> point(std::span<const std::size_t> index) const;

  double max_value() const;
  // Position of x on axis k, matched within an absolute tolerance.
  std::size_t axis_index_of(std::size_t k, double x,
                            double tol = kArithmeticTol) const;
  bool symmetric(double tol = kArithmeticTol) const;

 private:
  double theta_ = 1.0;
  std::vector<std::vector<double>> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

// Atoms with probabilities on [0, theta]; models the marginal law of an
// e-variable when its mean is at most one.
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<double> atoms, std::vector<double> probs);
  static DiscreteDistribution point_mass(double atom);
  static DiscreteDistribution two_point(double x, double px, double y,
                                        double py);

  std::size_t size() const { return atoms_.size(); }
  double atom(std::size_t i) const { return atoms_[i]; }
  double prob(std::size_t i) const { return probs_[i]; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }

  double mean() const;
  bool is_evalue_law(double tol = kArithmeticTol) const;
  // Expectation of a function given by its values on the atoms.
  double expectation(std::span<const double> values_on_atoms) const;
  // Drops atoms carrying zero probability.
  DiscreteDistribution without_null_atoms() const;

 private:
  std::vector<double> atoms_;
  std::vector<double> probs_;
};

// One support point of a coupling: per-marginal atom indices plus its mass.
struct CouplingEntry {
  std::vector<std::size_t> index;
  double mass = 0.0;
};

// Joint probability mass with prescribed marginals. Construction checks the
// mass total and every univariate projection against the marginals.
class Coupling {
 public:
  Coupling(std::vector<DiscreteDistribution> marginals,
           std::vector<CouplingEntry> entries);

  std::size_t arity() const { return marginals_.size(); }
  const std::vector<DiscreteDistribution>& marginals() const {
    return marginals_;
  }
  const std::vector<CouplingEntry>& entries() const { return entries_; }

  // Expectation of f over the joint law; f sees the atom coordinates.
  double expectation(
      const std::function<double(std::span<const double>)>& f) const;
  // Expectation of a grid function whose axes contain all marginal atoms.
  double expectation_on_grid(const GridFunction& f) const;

 private:
  std::vector<DiscreteDistribution> marginals_;
  std::vector<CouplingEntry> entries_;
};

// lambda . (e, 1): the weighted average of the inputs and the constant 1.
double weighted_merge(const Weights& lambda, const EValueVector& e);

// Samples f on the product grid. Non-monotone samples are reported via
// MonotonicityError, not repaired; negative samples raise std::domain_error.
GridFunction grid_sample(
    const std::function<double(std::span<const double>)>& f, double theta,
    std::vector<std::vector<double>> axes);

// First grid node (row-major order) violating F <= max(1, max coordinate),
// if any. A pass implies F(e) <= 1 + sum(e) everywhere on the grid.
struct StructuralViolation {
  std::vector<std::size_t> index;
  std::vector<double> point;
  double value = 0.0;
  double bound = 0.0;
  double gap = 0.0;
};
std::optional<StructuralViolation> structural_upper_check(
    const GridFunction& f);

// Converts a level-alpha randomized test outcome into an e-value.
double test_to_evalue(double tau, double alpha);

// Uniform axis over [0, theta] with at least `resolution` points, always
// containing 0, 1 and theta.
std::vector<double> make_axis(double theta, std::size_t resolution);

}  // namespace emerge
