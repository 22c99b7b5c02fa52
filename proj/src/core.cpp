#include "emerge/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace emerge {

namespace {

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

std::string index_to_string(std::span<const std::size_t> index) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i > 0) out << ", ";
    out << index[i];
  }
  out << ")";
  return out.str();
}

}  // namespace

MonotonicityError::MonotonicityError(std::string message,
                                     std::vector<std::size_t> lower_index,
                                     std::vector<std::size_t> upper_index,
                                     double lower_value, double upper_value)
    : std::runtime_error(std::move(message)),
      lower_index_(std::move(lower_index)),
      upper_index_(std::move(upper_index)),
      lower_value_(lower_value),
      upper_value_(upper_value) {}

Weights::Weights(std::vector<double> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) {
    throw std::invalid_argument("Weights: need at least two entries");
  }
  double sum = 0.0;
  for (double w : entries_) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
      throw std::invalid_argument("Weights: entries must lie in [0, 1]");
    }
    sum += w;
  }
  if (!close(sum, 1.0, kArithmeticTol)) {
    throw std::invalid_argument("Weights: entries must sum to 1");
  }
}

EValueVector::EValueVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("EValueVector: empty");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(
          "EValueVector: entries must be finite and nonnegative");
    }
  }
}

double EValueVector::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

GridFunction::GridFunction(double theta, std::vector<std::vector<double>> axes,
                           std::vector<double> values)
    : theta_(theta), axes_(std::move(axes)), values_(std::move(values)) {
  if (!(theta_ >= 1.0) || !std::isfinite(theta_)) {
    throw std::invalid_argument("GridFunction: theta must be >= 1");
  }
  if (axes_.empty()) {
    throw std::invalid_argument("GridFunction: needs at least one axis");
  }
  std::size_t total = 1;
  for (const auto& axis : axes_) {
    if (axis.size() < 2) {
      throw std::invalid_argument("GridFunction: axis too short");
    }
    for (std::size_t i = 0; i < axis.size(); ++i) {
      if (!std::isfinite(axis[i]) || axis[i] < -kArithmeticTol ||
          axis[i] > theta_ + kArithmeticTol) {
        throw std::invalid_argument("GridFunction: axis point outside [0, theta]");
      }
      if (i > 0 && !(axis[i] > axis[i - 1])) {
        throw std::invalid_argument("GridFunction: axis not strictly increasing");
      }
    }
    auto contains = [&](double x) {
      return std::any_of(axis.begin(), axis.end(),
                         [&](double a) { return close(a, x, kArithmeticTol); });
    };
    if (!contains(0.0) || !contains(1.0) || !contains(theta_)) {
      throw std::invalid_argument("GridFunction: axis must contain 0, 1 and theta");
    }
    total *= axis.size();
  }
  if (values_.size() != total) {
    throw std::invalid_argument("GridFunction: value count does not match grid");
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t k = axes_.size(); k-- > 1;) {
    strides_[k - 1] = strides_[k] * axes_[k].size();
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("GridFunction: values must be finite and >= 0");
    }
  }
  // Monotonicity along every axis; a decrease beyond tolerance is an error
  // carrying the witnessing pair of nodes.
  std::vector<std::size_t> index(axes_.size(), 0);
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    unflatten(flat, index);
    for (std::size_t k = 0; k < axes_.size(); ++k) {
      if (index[k] + 1 >= axes_[k].size()) continue;
      std::size_t next = flat + strides_[k];
      if (values_[next] < values_[flat] - kMonotoneTol) {
        std::vector<std::size_t> upper = index;
        upper[k] += 1;
        throw MonotonicityError(
            "GridFunction: values decrease along axis " + std::to_string(k) +
                " between nodes " + index_to_string(index) + " and " +
                index_to_string(upper),
            index, upper, values_[flat], values_[next]);
      }
    }
  }
}

std::size_t GridFunction::flatten(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    flat += index[k] * strides_[k];
  }
  return flat;
}

void GridFunction::unflatten(std::size_t flat,
                             std::span<std::size_t> index) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    index[k] = flat / strides_[k];
    flat %= strides_[k];
  }
}

double GridFunction::value_at(std::span<const std::size_t> index) const {
  return values_[flatten(index)];
}

std::vector<double> GridFunction::point(
    std::span<const std::size_t> index) const {
  std::vector<double> coords(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    coords[k] = axes_[k].at(index[k]);
  }
  return coords;
}

double GridFunction::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

std::size_t GridFunction::axis_index_of(std::size_t k, double x,
                                        double tol) const {
  const auto& axis = axes_.at(k);
  auto it = std::lower_bound(axis.begin(), axis.end(), x - tol);
  if (it != axis.end() && close(*it, x, tol)) {
    return static_cast<std::size_t>(it - axis.begin());
  }
  throw AlignmentError("value " + std::to_string(x) + " is not on grid axis " +
                       std::to_string(k));
}

bool GridFunction::symmetric(double tol) const {
  for (std::size_t k = 1; k < axes_.size(); ++k) {
    if (axes_[k].size() != axes_[0].size()) return false;
    for (std::size_t i = 0; i < axes_[k].size(); ++i) {
      if (!close(axes_[k][i], axes_[0][i], tol)) return false;
    }
  }
  // Transposition invariance for every adjacent pair generates all
  // permutations.
  std::vector<std::size_t> index(axes_.size(), 0);
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    unflatten(flat, index);
    for (std::size_t k = 0; k + 1 < axes_.size(); ++k) {
      std::vector<std::size_t> swapped(index.begin(), index.end());
      std::swap(swapped[k], swapped[k + 1]);
      if (!close(values_[flat], value_at(swapped), tol)) return false;
    }
  }
  return true;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> atoms,
                                           std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  if (atoms_.empty() || atoms_.size() != probs_.size()) {
    throw std::invalid_argument(
        "DiscreteDistribution: atoms and probs must be nonempty and match");
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!std::isfinite(atoms_[i]) || atoms_[i] < 0.0) {
      throw std::invalid_argument(
          "DiscreteDistribution: atoms must be finite and nonnegative");
    }
    if (i > 0 && !(atoms_[i] > atoms_[i - 1])) {
      throw std::invalid_argument(
          "DiscreteDistribution: atoms must be strictly increasing");
    }
    if (!std::isfinite(probs_[i]) || probs_[i] < 0.0) {
      throw std::invalid_argument(
          "DiscreteDistribution: probabilities must be nonnegative");
    }
  }
  double sum = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (!close(sum, 1.0, kArithmeticTol)) {
    throw std::invalid_argument(
        "DiscreteDistribution: probabilities must sum to 1");
  }
}

DiscreteDistribution DiscreteDistribution::point_mass(double atom) {
  return DiscreteDistribution({atom}, {1.0});
}

DiscreteDistribution DiscreteDistribution::two_point(double x, double px,
                                                     double y, double py) {
  if (!(x < y)) {
    throw std::invalid_argument("DiscreteDistribution: atoms must satisfy x < y");
  }
  return DiscreteDistribution({x, y}, {px, py});
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) m += atoms_[i] * probs_[i];
  return m;
}

bool DiscreteDistribution::is_evalue_law(double tol) const {
  return mean() <= 1.0 + tol;
}

double DiscreteDistribution::expectation(
    std::span<const double> values_on_atoms) const {
  if (values_on_atoms.size() != atoms_.size()) {
    throw std::invalid_argument("expectation: value count mismatch");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    e += values_on_atoms[i] * probs_[i];
  }
  return e;
}

DiscreteDistribution DiscreteDistribution::without_null_atoms() const {
  std::vector<double> atoms, probs;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (probs_[i] > 0.0) {
      atoms.push_back(atoms_[i]);
      probs.push_back(probs_[i]);
    }
  }
  if (atoms.empty()) {
    throw std::invalid_argument("DiscreteDistribution: all atoms have mass 0");
  }
  return DiscreteDistribution(std::move(atoms), std::move(probs));
}

Coupling::Coupling(std::vector<DiscreteDistribution> marginals,
                   std::vector<CouplingEntry> entries)
    : marginals_(std::move(marginals)), entries_(std::move(entries)) {
  if (marginals_.empty()) {
    throw std::invalid_argument("Coupling: needs at least one marginal");
  }
  double total = 0.0;
  std::vector<std::vector<double>> projection(marginals_.size());
  for (std::size_t k = 0; k < marginals_.size(); ++k) {
    projection[k].assign(marginals_[k].size(), 0.0);
  }
  for (const auto& entry : entries_) {
    if (entry.index.size() != marginals_.size()) {
      throw std::invalid_argument("Coupling: support tuple arity mismatch");
    }
    if (!(entry.mass >= 0.0) || !std::isfinite(entry.mass)) {
      throw std::invalid_argument("Coupling: masses must be nonnegative");
    }
    for (std::size_t k = 0; k < marginals_.size(); ++k) {
      if (entry.index[k] >= marginals_[k].size()) {
        throw std::invalid_argument("Coupling: atom index out of range");
      }
      projection[k][entry.index[k]] += entry.mass;
    }
    total += entry.mass;
  }
  if (!close(total, 1.0, kCouplingTol)) {
    throw std::invalid_argument("Coupling: masses must sum to 1");
  }
  for (std::size_t k = 0; k < marginals_.size(); ++k) {
    for (std::size_t i = 0; i < marginals_[k].size(); ++i) {
      if (!close(projection[k][i], marginals_[k].prob(i), kCouplingTol)) {
        throw std::invalid_argument(
            "Coupling: projection does not reproduce marginal " +
            std::to_string(k));
      }
    }
  }
}

double Coupling::expectation(
    const std::function<double(std::span<const double>)>& f) const {
  std::vector<double> coords(marginals_.size());
  double e = 0.0;
  for (const auto& entry : entries_) {
    if (entry.mass == 0.0) continue;
    for (std::size_t k = 0; k < marginals_.size(); ++k) {
      coords[k] = marginals_[k].atom(entry.index[k]);
    }
    e += entry.mass * f(coords);
  }
  return e;
}

double Coupling::expectation_on_grid(const GridFunction& f) const {
  if (f.arity() != marginals_.size()) {
    throw std::invalid_argument("expectation_on_grid: arity mismatch");
  }
  // Atom index -> axis index, per marginal.
  std::vector<std::vector<std::size_t>> axis_of(marginals_.size());
  for (std::size_t k = 0; k < marginals_.size(); ++k) {
    axis_of[k].reserve(marginals_[k].size());
    for (std::size_t i = 0; i < marginals_[k].size(); ++i) {
      axis_of[k].push_back(f.axis_index_of(k, marginals_[k].atom(i)));
    }
  }
  double e = 0.0;
  std::vector<std::size_t> node(marginals_.size());
  for (const auto& entry : entries_) {
    if (entry.mass == 0.0) continue;
    for (std::size_t k = 0; k < marginals_.size(); ++k) {
      node[k] = axis_of[k][entry.index[k]];
    }
    e += entry.mass * f.value_at(node);
  }
  return e;
}

double weighted_merge(const Weights& lambda, const EValueVector& e) {
  if (lambda.arity() != e.size()) {
    throw std::invalid_argument(
        "weighted_merge: weight arity does not match input count");
  }
  double merged = lambda.constant_weight();
  for (std::size_t k = 0; k < e.size(); ++k) {
    merged += lambda.entry(k) * e[k];
  }
  return merged;
}

GridFunction grid_sample(
    const std::function<double(std::span<const double>)>& f, double theta,
    std::vector<std::vector<double>> axes) {
  std::size_t total = 1;
  for (const auto& axis : axes) total *= axis.size();
  std::vector<double> values(total);
  std::vector<std::size_t> index(axes.size(), 0);
  std::vector<double> coords(axes.size());
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t k = 0; k < axes.size(); ++k) {
      coords[k] = axes[k][index[k]];
    }
    double v = f(coords);
    if (!std::isfinite(v)) {
      throw std::domain_error("grid_sample: non-finite sample");
    }
    if (v < 0.0) {
      throw std::domain_error("grid_sample: negative sample");
    }
    values[flat] = v;
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++index[k] < axes[k].size()) break;
      index[k] = 0;
    }
  }
  return GridFunction(theta, std::move(axes), std::move(values));
}

std::optional<StructuralViolation> structural_upper_check(
    const GridFunction& f) {
  std::vector<std::size_t> index(f.arity(), 0);
  for (std::size_t flat = 0; flat < f.node_count(); ++flat) {
    f.unflatten(flat, index);
    std::vector<double> coords = f.point(index);
    double bound = 1.0;
    for (double c : coords) bound = std::max(bound, c);
    double v = f.value_flat(flat);
    if (v > bound + kMonotoneTol) {
      StructuralViolation violation;
      violation.index = index;
      violation.point = std::move(coords);
      violation.value = v;
      violation.bound = bound;
      violation.gap = v - bound;
      return violation;
    }
  }
  return std::nullopt;
}

double test_to_evalue(double tau, double alpha) {
  if (!(tau >= 0.0) || !(tau <= 1.0)) {
    throw std::domain_error("test_to_evalue: tau must lie in [0, 1]");
  }
  if (!(alpha > 0.0) || !(alpha <= 1.0)) {
    throw std::domain_error("test_to_evalue: alpha must lie in (0, 1]");
  }
  return tau / alpha;
}

std::vector<double> make_axis(double theta, std::size_t resolution) {
  if (!(theta >= 1.0)) {
    throw std::invalid_argument("make_axis: theta must be >= 1");
  }
  if (resolution < 2) {
    throw std::invalid_argument("make_axis: resolution must be >= 2");
  }
  std::vector<double> axis;
  axis.reserve(resolution + 2);
  for (std::size_t i = 0; i < resolution; ++i) {
    axis.push_back(theta * static_cast<double>(i) /
                   static_cast<double>(resolution - 1));
  }
  axis.push_back(1.0);
  std::sort(axis.begin(), axis.end());
  std::vector<double> unique;
  for (double x : axis) {
    if (unique.empty() || x > unique.back() + kArithmeticTol) {
      unique.push_back(x);
    }
  }
  unique.front() = 0.0;
  unique.back() = theta;
  return unique;
}

}  // namespace emerge
