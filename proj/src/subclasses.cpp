#include "emerge/subclasses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "emerge/kernels.hpp"

namespace emerge::subclasses {

namespace {

constexpr double kGridSlack = 1e-3;  // tolerance for trapezoid invariants

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double integral = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    integral += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  }
  return integral;
}

// Piecewise-linear evaluation on an increasing grid.
double interpolate(std::span<const double> x, std::span<const double> y,
                   double at) {
  auto it = std::lower_bound(x.begin(), x.end(), at);
  if (it == x.begin()) return y.front();
  if (it == x.end()) return y.back();
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double t = (at - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

}  // namespace

Calibrator::Calibrator(std::vector<double> p_grid, std::vector<double> values,
                       std::optional<double> cap)
    : p_grid_(std::move(p_grid)), values_(std::move(values)), cap_(cap) {
  if (p_grid_.empty() || p_grid_.size() != values_.size()) {
    throw std::invalid_argument("Calibrator: grid/value size mismatch");
  }
  if (cap_ && (!std::isfinite(*cap_) || *cap_ <= 0.0)) {
    throw std::invalid_argument("Calibrator: cap must be a positive real");
  }
  if (cap_ && p_grid_.front() > 0.0) {
    p_grid_.insert(p_grid_.begin(), 0.0);
    values_.insert(values_.begin(), *cap_);
  }
  for (std::size_t i = 0; i < p_grid_.size(); ++i) {
    if (p_grid_[i] < 0.0 || p_grid_[i] > 1.0) {
      throw std::invalid_argument("Calibrator: grid must lie in [0, 1]");
    }
    if (i > 0 && !(p_grid_[i] > p_grid_[i - 1])) {
      throw std::invalid_argument("Calibrator: grid must be increasing");
    }
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw std::invalid_argument("Calibrator: values must be finite and >= 0");
    }
    if (i > 0 && values_[i] > values_[i - 1] + kArithmeticTol) {
      throw std::invalid_argument("Calibrator: values must be nonincreasing");
    }
  }
  if (std::fabs(p_grid_.back() - 1.0) > kArithmeticTol) {
    throw std::invalid_argument("Calibrator: grid must end at 1");
  }
  if (cap_ && values_.front() > *cap_ + kArithmeticTol) {
    throw std::invalid_argument("Calibrator: values exceed the cap");
  }
  normalization_ = trapezoid(p_grid_, values_);
  if (normalization_ > 1.0 + kGridSlack) {
    throw std::invalid_argument(
        "Calibrator: trapezoid normalization exceeds 1 (not an admissible "
        "calibrator at grid tolerance)");
  }
}

Calibrator Calibrator::from_function(const std::function<double(double)>& f,
                                     double cap) {
  std::vector<double> grid = default_p_grid();
  std::vector<double> values;
  values.reserve(grid.size());
  for (double p : grid) {
    values.push_back(std::min(f(p), cap));
  }
  return Calibrator(std::move(grid), std::move(values), cap);
}

std::vector<double> Calibrator::default_p_grid() {
  // Geometric spacing toward 0 keeps the trapezoid rule from overshooting
  // on integrable poles.
  std::vector<double> grid;
  double p = 1.0;
  while (p > 1e-12) {
    grid.push_back(p);
    p /= 1.08;
  }
  std::reverse(grid.begin(), grid.end());
  return grid;
}

double Calibrator::operator()(double p) const {
  if (!(p >= 0.0) || p > 1.0 + kArithmeticTol) {
    throw std::domain_error("Calibrator: argument outside [0, 1]");
  }
  if (p < p_grid_.front()) {
    // Only reachable without a cap; the pole is undefined then.
    throw std::domain_error(
        "Calibrator: argument below the grid and no cap configured");
  }
  return interpolate(p_grid_, values_, std::min(p, 1.0));
}

MarginalModel::MarginalModel(std::vector<double> x_grid,
                             std::vector<double> survival)
    : x_grid_(std::move(x_grid)), values_(std::move(survival)) {
  if (x_grid_.size() < 2 || x_grid_.size() != values_.size()) {
    throw std::invalid_argument("MarginalModel: grid/value size mismatch");
  }
  if (std::fabs(x_grid_.front()) > kArithmeticTol) {
    throw std::invalid_argument("MarginalModel: grid must start at 0");
  }
  if (std::fabs(values_.front() - 1.0) > 1e-9) {
    throw std::invalid_argument("MarginalModel: survival must start at 1");
  }
  for (std::size_t i = 0; i < x_grid_.size(); ++i) {
    if (i > 0 && !(x_grid_[i] > x_grid_[i - 1])) {
      throw std::invalid_argument("MarginalModel: grid must be increasing");
    }
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw std::invalid_argument("MarginalModel: survival must be >= 0");
    }
    if (i > 0 && values_[i] > values_[i - 1] + kArithmeticTol) {
      throw std::invalid_argument("MarginalModel: survival must be nonincreasing");
    }
  }
  // Mean of a nonnegative variable = integral of its survival function.
  mean_ = trapezoid(x_grid_, values_);
  if (mean_ > 1.0 + kGridSlack) {
    throw std::invalid_argument("MarginalModel: mean exceeds 1");
  }
}

MarginalModel MarginalModel::from_survival_function(
    const std::function<double(double)>& g, double theta,
    std::size_t resolution) {
  if (!(theta >= 1.0) || resolution < 2) {
    throw std::invalid_argument("MarginalModel: bad theta or resolution");
  }
  std::vector<double> grid(resolution), values(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    grid[i] = theta * static_cast<double>(i) / static_cast<double>(resolution - 1);
    values[i] = g(grid[i]);
  }
  return MarginalModel(std::move(grid), std::move(values));
}

double MarginalModel::survival(double x) const {
  if (!(x >= 0.0) || x > theta() + kArithmeticTol) {
    throw std::domain_error("MarginalModel: argument outside [0, theta]");
  }
  return interpolate(x_grid_, values_, std::min(x, theta()));
}

bool MarginalModel::strictly_decreasing() const {
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (!(values_[i] < values_[i - 1])) return false;
  }
  return true;
}

SecondMomentBound::SecondMomentBound(std::vector<std::vector<double>> sigma)
    : sigma_(std::move(sigma)) {
  for (const auto& row : sigma_) {
    if (row.size() != sigma_.size()) {
      throw std::invalid_argument("SecondMomentBound: matrix must be square");
    }
  }
  for (std::size_t i = 0; i < sigma_.size(); ++i) {
    for (std::size_t j = 0; j < sigma_.size(); ++j) {
      if (!std::isfinite(sigma_[i][j]) || sigma_[i][j] < 0.0) {
        throw std::invalid_argument(
            "SecondMomentBound: entries must be finite and nonnegative");
      }
      if (std::fabs(sigma_[i][j] - sigma_[j][i]) > kArithmeticTol) {
        throw std::invalid_argument("SecondMomentBound: matrix must be symmetric");
      }
    }
  }
}

double SecondMomentBound::sigma(std::size_t i, std::size_t j) const {
  if (i >= sigma_.size() || j >= sigma_.size()) {
    throw std::invalid_argument("SecondMomentBound: index out of range");
  }
  return sigma_[i][j];
}

double calibrated_merge(const Weights& lambda,
                        std::span<const Calibrator> calibrators,
                        std::span<const MarginalModel> survivals,
                        const EValueVector& e) {
  const std::size_t arity = e.size();
  if (lambda.arity() != arity || calibrators.size() != arity ||
      survivals.size() != arity) {
    throw std::invalid_argument("calibrated_merge: arity mismatch");
  }
  std::vector<double> transformed(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    if (!survivals[k].strictly_decreasing()) {
      throw std::invalid_argument(
          "calibrated_merge: survival function must be strictly decreasing");
    }
    transformed[k] = calibrators[k](survivals[k].survival(e[k]));
  }
  return weighted_merge(lambda, EValueVector(std::move(transformed)));
}

double product_merge(std::size_t i, std::size_t j,
                     const SecondMomentBound& sigma, const EValueVector& e) {
  if (i >= e.size() || j >= e.size()) {
    throw std::invalid_argument("product_merge: index out of range");
  }
  const double s = sigma.sigma(i, j);
  if (!(s > 0.0)) {
    throw std::domain_error("product_merge: sigma_ij must be positive");
  }
  return e[i] * e[j] / s;
}

double mixture_merge(std::span<const MixtureTerm> terms,
                     const SecondMomentBound& sigma, const EValueVector& e) {
  if (terms.empty()) {
    throw std::invalid_argument("mixture_merge: needs at least one term");
  }
  double weight_sum = 0.0;
  double merged = 0.0;
  for (const auto& term : terms) {
    if (!(term.weight >= 0.0)) {
      throw std::invalid_argument("mixture_merge: weights must be nonnegative");
    }
    weight_sum += term.weight;
    if (term.lambda) {
      merged += term.weight * weighted_merge(*term.lambda, e);
    } else {
      merged += term.weight * product_merge(term.i, term.j, sigma, e);
    }
  }
  if (std::fabs(weight_sum - 1.0) > kArithmeticTol) {
    throw std::invalid_argument("mixture_merge: weights must sum to 1");
  }
  return merged;
}

double identical_merge(double lambda, const EValueVector& e) {
  if (!(lambda >= 0.0) || !(lambda <= 1.0)) {
    throw std::invalid_argument("identical_merge: lambda must lie in [0, 1]");
  }
  return lambda + (1.0 - lambda) * e.max();
}

bool inputs_identical(const EValueVector& e, double tol) {
  for (std::size_t k = 1; k < e.size(); ++k) {
    if (std::fabs(e[k] - e[0]) > tol) return false;
  }
  return true;
}

double exchangeable_merge(double beta, const EValueVector& e) {
  if (!(beta > 1.0)) {
    throw std::domain_error("exchangeable_merge: beta must exceed 1");
  }
  double running = 0.0;
  double top = -1.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    running += e[k];
    top = std::max(top, running / static_cast<double>(k + 1));
  }
  return top >= beta ? beta : 0.0;
}

IidExponentialSampler::IidExponentialSampler(std::size_t arity)
    : arity_(arity) {
  if (arity_ == 0) {
    throw std::invalid_argument("IidExponentialSampler: arity must be positive");
  }
}

void IidExponentialSampler::draw(rng::SplitMix64& stream,
                                 std::vector<double>& out) const {
  out.resize(arity_);
  for (double& v : out) v = stream.exponential();
}

std::string IidExponentialSampler::describe() const {
  std::ostringstream out;
  out << "iid unit-mean exponential, K=" << arity_;
  return out.str();
}

PermutationSampler::PermutationSampler(std::vector<double> base)
    : base_(std::move(base)) {
  if (base_.empty()) {
    throw std::invalid_argument("PermutationSampler: base must be nonempty");
  }
  double mean = 0.0;
  for (double v : base_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("PermutationSampler: base must be >= 0");
    }
    mean += v;
  }
  mean /= static_cast<double>(base_.size());
  if (mean > 1.0) {
    for (double& v : base_) v /= mean;
  }
}

void PermutationSampler::draw(rng::SplitMix64& stream,
                              std::vector<double>& out) const {
  out = base_;
  for (std::size_t k = out.size(); k > 1; --k) {
    std::swap(out[k - 1], out[stream.index(k)]);
  }
}

std::string PermutationSampler::describe() const {
  std::ostringstream out;
  out << "random permutations of a fixed vector, K=" << base_.size();
  return out.str();
}

IdenticalExponentialSampler::IdenticalExponentialSampler(std::size_t arity)
    : arity_(arity) {
  if (arity_ == 0) {
    throw std::invalid_argument(
        "IdenticalExponentialSampler: arity must be positive");
  }
}

void IdenticalExponentialSampler::draw(rng::SplitMix64& stream,
                                       std::vector<double>& out) const {
  out.assign(arity_, stream.exponential());
}

std::string IdenticalExponentialSampler::describe() const {
  std::ostringstream out;
  out << "one unit-mean exponential copied to all coordinates, K=" << arity_;
  return out.str();
}

MonteCarloResult mc_mean(const RuleFn& rule, const Sampler& sampler,
                         std::size_t replications, std::uint64_t seed) {
  if (replications == 0) {
    throw std::invalid_argument("mc_mean: needs at least one replication");
  }
  auto acc = kernels::accumulate(replications, [&](std::size_t rep) {
    auto stream = rng::replication_stream(seed, rep);
    std::vector<double> e;
    sampler.draw(stream, e);
    return rule(e);
  });
  return {acc.mean(), acc.std_error(), replications};
}

AdmissibilityReport full_support_admissibility_check(
    const RuleFn& rule, const RuleFn& improvement, const Sampler& sampler,
    std::size_t replications, std::uint64_t seed) {
  AdmissibilityReport report;
  report.improvement_estimate = mc_mean(improvement, sampler, replications, seed);
  // The claimed improvement must actually dominate the rule where sampled.
  auto shortfall = kernels::scan_max(replications, [&](std::size_t rep) {
    auto stream = rng::replication_stream(seed, rep);
    std::vector<double> e;
    sampler.draw(stream, e);
    return rule(e) - improvement(e);
  });
  if (shortfall.value > kArithmeticTol) {
    report.verdict = AdmissibilityVerdict::inconclusive;
    report.note = "improvement falls below the rule at a sampled point";
    return report;
  }
  if (!sampler.full_support()) {
    report.verdict = AdmissibilityVerdict::inconclusive;
    report.note = "sampler does not have full support";
    return report;
  }
  const auto& est = report.improvement_estimate;
  if (est.estimate > 1.0 + 3.0 * est.std_error) {
    report.verdict = AdmissibilityVerdict::improvement_rejected;
    report.note = "estimate exceeds 1 by more than 3 standard errors";
  } else {
    report.verdict = AdmissibilityVerdict::no_improvement;
    report.note = "no significant improvement detected";
  }
  return report;
}

std::optional<IncomparabilityWitnesses> incomparability_witnesses(
    double beta, const Weights& lambda, std::span<const double> candidates) {
  if (!(beta > 1.0)) {
    throw std::domain_error("incomparability_witnesses: beta must exceed 1");
  }
  if (candidates.empty()) {
    throw std::invalid_argument("incomparability_witnesses: empty candidates");
  }
  const std::size_t arity = lambda.arity();
  std::vector<std::size_t> odo(arity, 0);
  std::vector<double> point(arity);
  std::optional<IncomparabilityWitnesses> found;
  bool have_larger = false, have_smaller = false;
  while (true) {
    for (std::size_t k = 0; k < arity; ++k) point[k] = candidates[odo[k]];
    EValueVector e(point);
    const double f_beta = exchangeable_merge(beta, e);
    const double merged = weighted_merge(lambda, e);
    if (!have_larger && f_beta > merged + kArithmeticTol) {
      if (!found) found.emplace(IncomparabilityWitnesses{e, 0, 0, e, 0, 0});
      found->where_beta_larger = e;
      found->beta_value_at_larger = f_beta;
      found->merge_value_at_larger = merged;
      have_larger = true;
    }
    if (!have_smaller && f_beta < merged - kArithmeticTol) {
      if (!found) found.emplace(IncomparabilityWitnesses{e, 0, 0, e, 0, 0});
      found->where_beta_smaller = e;
      found->beta_value_at_smaller = f_beta;
      found->merge_value_at_smaller = merged;
      have_smaller = true;
    }
    if (have_larger && have_smaller) return found;
    std::size_t k = arity;
    bool carry = true;
    while (k-- > 0 && carry) {
      if (++odo[k] < candidates.size()) {
        carry = false;
      } else {
        odo[k] = 0;
      }
    }
    if (carry) break;
  }
  return std::nullopt;
}

}  // namespace emerge::subclasses
