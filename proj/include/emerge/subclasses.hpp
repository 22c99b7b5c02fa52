#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emerge/core.hpp"
#include "emerge/rng.hpp"

// Merging rules that are valid only on restricted classes of e-value
// vectors, plus the seeded Monte Carlo harness that checks them empirically.
namespace emerge::subclasses {

// A decreasing function on [0, 1] turning a uniform p-value into an e-value.
// The pole at 0 is represented by a finite cap; a calibrator built without
// one refuses to evaluate below its grid.
class Calibrator {
 public:
  Calibrator(std::vector<double> p_grid, std::vector<double> values,
             std::optional<double> cap = 1e6);
  static Calibrator from_function(const std::function<double(double)>& f,
                                  double cap = 1e6);
  static std::vector<double> default_p_grid();

  // Monotone linear interpolation on the grid.
  double operator()(double p) const;
  // Trapezoid integral over the stored grid; at most 1 + 1e-3 by invariant.
  double normalization() const { return normalization_; }
  const std::optional<double>& cap() const { return cap_; }

 private:
  std::vector<double> p_grid_;
  std::vector<double> values_;
  std::optional<double> cap_;
  double normalization_ = 0.0;
};

// Survival function of a marginal law on [0, theta], with mean at most 1.
class MarginalModel {
 public:
  MarginalModel(std::vector<double> x_grid, std::vector<double> survival);
  static MarginalModel from_survival_function(
      const std::function<double(double)>& g, double theta,
      std::size_t resolution);

  double survival(double x) const;
  double mean() const { return mean_; }
  double theta() const { return x_grid_.back(); }
  bool strictly_decreasing() const;

 private:
  std::vector<double> x_grid_;
  std::vector<double> values_;
  double mean_ = 0.0;
};

// Upper bounds sigma_ij on the pairwise second moments E[E_i E_j].
class SecondMomentBound {
 public:
  explicit SecondMomentBound(std::vector<std::vector<double>> sigma);
  std::size_t size() const { return sigma_.size(); }
  double sigma(std::size_t i, std::size_t j) const;

 private:
  std::vector<std::vector<double>> sigma_;
};

// M_lambda applied to the calibrated survival transforms of the inputs;
// valid when the marginals of the inputs match the given survivals.
double calibrated_merge(const Weights& lambda,
                        std::span<const Calibrator> calibrators,
                        std::span<const MarginalModel> survivals,
                        const EValueVector& e);

// e_i * e_j / sigma_ij; valid under the second-moment bound.
double product_merge(std::size_t i, std::size_t j,
                     const SecondMomentBound& sigma, const EValueVector& e);

// One term of a convex mixture: either a weighted average or a scaled
// product of two coordinates.
struct MixtureTerm {
  std::optional<Weights> lambda;  // weighted average when set
  std::size_t i = 0;
  std::size_t j = 0;  // product term otherwise
  double weight = 0.0;
};
double mixture_merge(std::span<const MixtureTerm> terms,
                     const SecondMomentBound& sigma, const EValueVector& e);

// lambda + (1 - lambda) * max(e); valid when all coordinates are one and
// the same e-variable.
double identical_merge(double lambda, const EValueVector& e);
bool inputs_identical(const EValueVector& e, double tol = kArithmeticTol);

// beta if any running average (e_1 + ... + e_k) / k reaches beta, else 0;
// valid for exchangeable inputs.
double exchangeable_merge(double beta, const EValueVector& e);

// Sources of e-value vectors for the Monte Carlo harness. Every replication
// uses its own counter-based stream, so estimates are bit-reproducible for a
// fixed master seed regardless of execution order.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::size_t arity() const = 0;
  virtual bool full_support() const = 0;
  virtual void draw(rng::SplitMix64& stream, std::vector<double>& out) const = 0;
  virtual std::string describe() const = 0;
};

// Independent unit-mean exponentials; full support on the orthant.
class IidExponentialSampler final : public Sampler {
 public:
  explicit IidExponentialSampler(std::size_t arity);
  std::size_t arity() const override { return arity_; }
  bool full_support() const override { return true; }
  void draw(rng::SplitMix64& stream, std::vector<double>& out) const override;
  std::string describe() const override;

 private:
  std::size_t arity_;
};

// Uniformly random permutations of a fixed vector, rescaled to mean at most
// 1; exchangeable but supported on a finite set.
class PermutationSampler final : public Sampler {
 public:
  explicit PermutationSampler(std::vector<double> base);
  std::size_t arity() const override { return base_.size(); }
  bool full_support() const override { return false; }
  void draw(rng::SplitMix64& stream, std::vector<double>& out) const override;
  std::string describe() const override;
  const std::vector<double>& base() const { return base_; }

 private:
  std::vector<double> base_;
};

// One unit-mean exponential copied to every coordinate.
class IdenticalExponentialSampler final : public Sampler {
 public:
  explicit IdenticalExponentialSampler(std::size_t arity);
  std::size_t arity() const override { return arity_; }
  bool full_support() const override { return false; }
  void draw(rng::SplitMix64& stream, std::vector<double>& out) const override;
  std::string describe() const override;

 private:
  std::size_t arity_;
};

using RuleFn = std::function<double(const std::vector<double>&)>;

struct MonteCarloResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
};

// Mean of rule over `replications` draws from the sampler.
MonteCarloResult mc_mean(const RuleFn& rule, const Sampler& sampler,
                         std::size_t replications, std::uint64_t seed);

enum class AdmissibilityVerdict {
  improvement_rejected,  // the improvement's mean exceeds 1 by over 3 s.e.
  no_improvement,
  inconclusive,  // sampler lacks full support or improvement < rule somewhere
};

struct AdmissibilityReport {
  AdmissibilityVerdict verdict = AdmissibilityVerdict::inconclusive;
  MonteCarloResult improvement_estimate;
  std::string note;
};

// Estimates E[improvement(E)] over the sampler; a mean above 1 + 3 s.e.
// rejects the improvement, showing the rule cannot be strictly improved on
// full-support inputs.
AdmissibilityReport full_support_admissibility_check(
    const RuleFn& rule, const RuleFn& improvement, const Sampler& sampler,
    std::size_t replications, std::uint64_t seed);

// Grid search for points where the running-average rule beats the weighted
// average strictly and vice versa.
struct IncomparabilityWitnesses {
  EValueVector where_beta_larger;
  double beta_value_at_larger = 0.0;
  double merge_value_at_larger = 0.0;
  EValueVector where_beta_smaller;
  double beta_value_at_smaller = 0.0;
  double merge_value_at_smaller = 0.0;
};
std::optional<IncomparabilityWitnesses> incomparability_witnesses(
    double beta, const Weights& lambda, std::span<const double> candidates);

}  // namespace emerge::subclasses
