#include "emerge/domination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "emerge/kernels.hpp"
#include "emerge/simplex.hpp"
#include "emerge/transport.hpp"

namespace emerge::domination {

namespace {

constexpr double kSlopeTol = 1e-9;

void check_axis(std::span<const double> axis, std::span<const double> values) {
  if (axis.empty() || axis.size() != values.size()) {
    throw std::domain_error("univariate table: empty grid or size mismatch");
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i]) || !std::isfinite(values[i])) {
      throw std::domain_error("univariate table: non-finite entry");
    }
    if (values[i] < 0.0) {
      throw std::domain_error("univariate table: negative value");
    }
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw std::domain_error("univariate table: axis not increasing");
    }
  }
  if (std::fabs(axis.front()) > kArithmeticTol) {
    throw std::domain_error("univariate table: axis must start at 0");
  }
  bool has_one = std::any_of(axis.begin(), axis.end(), [](double x) {
    return std::fabs(x - 1.0) <= kArithmeticTol;
  });
  if (!has_one) {
    throw std::domain_error("univariate table: axis must contain 1");
  }
}

DiscreteDistribution mean_one_pair(double x, double y) {
  const double w_high = (1.0 - x) / (y - x);
  return DiscreteDistribution::two_point(x, 1.0 - w_high, y, w_high);
}

}  // namespace

MeanConstrainedSup sup_mean_constrained(std::span<const double> axis,
                                        std::span<const double> values) {
  check_axis(axis, values);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_single = axis.size();
  std::size_t best_low = axis.size(), best_high = axis.size();
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (axis[i] > 1.0 + kArithmeticTol) break;
    if (values[i] > best) {
      best = values[i];
      best_single = i;
    }
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] < 1.0)) continue;
    for (std::size_t j = 0; j < axis.size(); ++j) {
      if (!(axis[j] > 1.0)) continue;
      const double w_high = (1.0 - axis[i]) / (axis[j] - axis[i]);
      const double v = (1.0 - w_high) * values[i] + w_high * values[j];
      if (v > best) {
        best = v;
        best_single = axis.size();
        best_low = i;
        best_high = j;
      }
    }
  }
  if (best_single < axis.size()) {
    return {best, DiscreteDistribution::point_mass(axis[best_single])};
  }
  return {best, mean_one_pair(axis[best_low], axis[best_high])};
}

MajorantResult linear_majorant(std::span<const double> axis,
                               std::span<const double> values, double r) {
  check_axis(axis, values);
  const double theta = axis.back();
  if (r < 0.0 || !std::isfinite(r)) {
    throw std::domain_error("linear_majorant: r must be a nonnegative real");
  }
  if (r == 0.0) {
    // Only the zero table admits the zero bound; any feasible slope works.
    for (std::size_t i = 0; i < axis.size(); ++i) {
      if (values[i] > kArithmeticTol) {
        DiscreteDistribution adversary =
            axis[i] <= 1.0 + kArithmeticTol
                ? DiscreteDistribution::point_mass(axis[i])
                : mean_one_pair(0.0, axis[i]);
        double expectation = 0.0;
        for (std::size_t a = 0; a < adversary.size(); ++a) {
          auto it = std::lower_bound(axis.begin(), axis.end(),
                                     adversary.atom(a) - kArithmeticTol);
          expectation +=
              adversary.prob(a) *
              values[static_cast<std::size_t>(it - axis.begin())];
        }
        throw MajorantInfeasibleError(
            "linear_majorant: r = 0 requires an identically zero table",
            std::move(adversary), expectation, r);
      }
    }
    return {0.0, 0.0, 1.0, 0.0, theta};
  }

  // The constraint at x = 1 does not involve h at all.
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (std::fabs(axis[i] - 1.0) <= kArithmeticTol &&
        values[i] > r + kSlopeTol * std::max(1.0, r)) {
      throw MajorantInfeasibleError(
          "linear_majorant: table exceeds r at x = 1",
          DiscreteDistribution::point_mass(1.0), values[i], r);
    }
  }

  double h_max = 1.0;
  std::size_t arg_max = axis.size();
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] < 1.0)) continue;
    const double cand = (1.0 - values[i] / r) / (1.0 - axis[i]);
    if (cand < h_max) {
      h_max = cand;
      arg_max = i;
    }
  }
  double h_min = 0.0;
  std::size_t arg_min = axis.size();
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] > 1.0)) continue;
    const double cand = (values[i] / r - 1.0) / (axis[i] - 1.0);
    if (cand > h_min) {
      h_min = cand;
      arg_min = i;
    }
  }

  if (h_min > h_max + kSlopeTol) {
    // Single atom below 1 already breaking the bound?
    for (std::size_t i = 0; i < axis.size(); ++i) {
      if (axis[i] <= 1.0 + kArithmeticTol && values[i] > r + kSlopeTol) {
        throw MajorantInfeasibleError(
            "linear_majorant: table exceeds r below 1",
            DiscreteDistribution::point_mass(axis[i]), values[i], r);
      }
    }
    // Otherwise mix the two witnesses to mean 1; its expectation exceeds r
    // exactly because the slope interval is empty.
    const std::size_t lo = arg_max == axis.size() ? 0 : arg_max;
    const std::size_t hi = arg_min;
    DiscreteDistribution adversary = mean_one_pair(axis[lo], axis[hi]);
    const double w_high = (1.0 - axis[lo]) / (axis[hi] - axis[lo]);
    const double expectation =
        (1.0 - w_high) * values[lo] + w_high * values[hi];
    std::ostringstream msg;
    msg << "linear_majorant: no feasible slope (h_min " << h_min << " > h_max "
        << h_max << "); the witnessing mean-1 law has expectation "
        << expectation << " > " << r;
    throw MajorantInfeasibleError(msg.str(), std::move(adversary), expectation,
                                  r);
  }

  MajorantResult out;
  out.r = r;
  out.h_min = h_min;
  out.h_max = h_max;
  // The smallest feasible slope gives the tightest bound near theta.
  out.h = h_min;
  out.theta = theta;
  return out;
}

std::vector<DiscreteDistribution> extreme_axis_laws(
    std::span<const double> axis) {
  std::vector<DiscreteDistribution> laws;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (axis[i] <= 1.0 + kArithmeticTol) {
      laws.push_back(DiscreteDistribution::point_mass(axis[i]));
    }
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] < 1.0)) continue;
    for (std::size_t j = 0; j < axis.size(); ++j) {
      if (!(axis[j] > 1.0)) continue;
      laws.push_back(mean_one_pair(axis[i], axis[j]));
    }
  }
  return laws;
}

std::vector<DiscreteDistribution> adversarial_axis_laws(
    std::span<const double> axis) {
  std::vector<DiscreteDistribution> laws;
  laws.push_back(DiscreteDistribution::point_mass(1.0));
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] < 1.0)) continue;
    for (std::size_t j = 0; j < axis.size(); ++j) {
      if (!(axis[j] > 1.0)) continue;
      laws.push_back(mean_one_pair(axis[i], axis[j]));
    }
  }
  return laws;
}

namespace {

// Certificate for a structural violation: the two-point adversary when the
// offending point has a coordinate above 1, constant e-variables otherwise.
NotValidError structural_certificate(const GridFunction& f,
                                     const StructuralViolation& violation) {
  double top = 0.0;
  for (double c : violation.point) top = std::max(top, c);
  if (top > 1.0) {
    auto adversary = transport::binary_adversary(
        f, EValueVector(violation.point));
    return NotValidError(
        "dominate: structural check failed; the two-point adversary at the "
        "violating node has expectation above 1",
        std::move(adversary.marginals), adversary.expectation);
  }
  std::vector<DiscreteDistribution> marginals;
  marginals.reserve(violation.point.size());
  for (double c : violation.point) {
    marginals.push_back(DiscreteDistribution::point_mass(c));
  }
  return NotValidError(
      "dominate: structural check failed at a node with all coordinates <= 1",
      std::move(marginals), violation.value);
}

}  // namespace

DominationReport dominate(const GridFunction& f, double epsilon,
                          const DominateOptions& options) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("dominate: epsilon must be positive");
  }
  const std::size_t arity = f.arity();

  if (auto violation = structural_upper_check(f)) {
    throw structural_certificate(f, *violation);
  }

  // Validity precheck over the adversarial family of marginal tuples.
  if (options.check_family || !options.family.empty()) {
    std::vector<std::vector<DiscreteDistribution>> tuples = options.family;
    if (tuples.empty()) {
      std::vector<std::vector<DiscreteDistribution>> per_axis(arity);
      std::vector<std::size_t> counts(arity);
      std::size_t total = 1;
      for (std::size_t k = 0; k < arity; ++k) {
        per_axis[k] = adversarial_axis_laws(f.axis(k));
        counts[k] = per_axis[k].size();
        total *= counts[k];
      }
      std::vector<std::size_t> odo(arity, 0);
      for (std::size_t t = 0; t < total; ++t) {
        std::vector<DiscreteDistribution> tuple;
        tuple.reserve(arity);
        for (std::size_t k = 0; k < arity; ++k) {
          tuple.push_back(per_axis[k][odo[k]]);
        }
        tuples.push_back(std::move(tuple));
        std::size_t k = arity;
        bool carry = true;
        while (k-- > 0 && carry) {
          if (++odo[k] < counts[k]) {
            carry = false;
          } else {
            odo[k] = 0;
          }
        }
      }
    }
    double worst_value = -std::numeric_limits<double>::infinity();
    const std::vector<DiscreteDistribution>* worst_tuple = nullptr;
    for (const auto& tuple : tuples) {
      auto cert = transport::worst_case_expectation(f, tuple,
                                                    options.validity_tol);
      if (cert.primal_value > worst_value) {
        worst_value = cert.primal_value;
        worst_tuple = &tuple;
      }
    }
    if (worst_tuple != nullptr && worst_value > 1.0 + options.validity_tol) {
      throw NotValidError(
          "dominate: worst-case expectation exceeds 1 on an adversarial "
          "marginal tuple",
          *worst_tuple, worst_value);
    }
  }

  // Joint LP: minimize the total mean-constrained bound of nonnegative
  // per-axis tables whose coordinatewise sum dominates f. The bound of each
  // table enters through its epigraph over the extreme mean-constrained laws.
  std::vector<std::size_t> phi_offset(arity, 0);
  std::size_t phi_total = 0;
  for (std::size_t k = 0; k < arity; ++k) {
    phi_offset[k] = phi_total;
    phi_total += f.axis(k).size();
  }
  lp::Problem problem;
  problem.num_vars = phi_total + arity;
  problem.objective.assign(problem.num_vars, 0.0);
  for (std::size_t k = 0; k < arity; ++k) {
    problem.objective[phi_total + k] = 1.0;
  }
  std::vector<std::size_t> index(arity);
  for (std::size_t flat = 0; flat < f.node_count(); ++flat) {
    f.unflatten(flat, index);
    lp::Constraint row;
    row.coeffs.assign(problem.num_vars, 0.0);
    for (std::size_t k = 0; k < arity; ++k) {
      row.coeffs[phi_offset[k] + index[k]] = 1.0;
    }
    row.rel = lp::Relation::ge;
    row.rhs = f.value_flat(flat);
    problem.constraints.push_back(std::move(row));
  }
  const std::size_t epigraph_start = problem.constraints.size();
  std::vector<std::vector<DiscreteDistribution>> laws(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    laws[k] = extreme_axis_laws(f.axis(k));
    for (const auto& law : laws[k]) {
      lp::Constraint row;
      row.coeffs.assign(problem.num_vars, 0.0);
      row.coeffs[phi_total + k] = 1.0;
      for (std::size_t a = 0; a < law.size(); ++a) {
        const std::size_t pos = f.axis_index_of(k, law.atom(a));
        row.coeffs[phi_offset[k] + pos] -= law.prob(a);
      }
      row.rel = lp::Relation::ge;
      row.rhs = 0.0;
      problem.constraints.push_back(std::move(row));
    }
  }

  lp::Solution sol = lp::minimize(problem);
  if (sol.status != lp::Status::optimal) {
    throw lp::SolverError("dominate: joint LP did not reach optimality",
                          sol.status, sol.objective,
                          -std::numeric_limits<double>::infinity());
  }

  std::vector<std::vector<double>> phi(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    phi[k].assign(sol.x.begin() + static_cast<std::ptrdiff_t>(phi_offset[k]),
                  sol.x.begin() + static_cast<std::ptrdiff_t>(
                                      phi_offset[k] + f.axis(k).size()));
    for (double& v : phi[k]) v = std::max(v, 0.0);
  }
  double sum_T = 0.0;
  for (std::size_t k = 0; k < arity; ++k) sum_T += sol.x[phi_total + k];

  if (sum_T > 1.0 + epsilon + kSlopeTol) {
    // The joint value is the exact grid-scale validity value, so exceeding
    // 1 + epsilon certifies invalidity. Recover the worst marginal tuple
    // from the epigraph duals and re-certify it with a full solve.
    std::vector<DiscreteDistribution> mixture;
    std::size_t row = epigraph_start;
    for (std::size_t k = 0; k < arity; ++k) {
      const auto& axis = f.axis(k);
      std::vector<double> prob(axis.size(), 0.0);
      double mass = 0.0;
      for (const auto& law : laws[k]) {
        const double w = std::max(0.0, sol.duals[row++]);
        if (w > 0.0) {
          for (std::size_t a = 0; a < law.size(); ++a) {
            prob[f.axis_index_of(k, law.atom(a))] += w * law.prob(a);
          }
          mass += w;
        }
      }
      if (mass <= 1e-9) {
        mixture.push_back(DiscreteDistribution::point_mass(1.0));
        continue;
      }
      std::vector<double> atoms_out, probs_out;
      double renormalized = 0.0;
      for (std::size_t i = 0; i < axis.size(); ++i) {
        if (prob[i] / mass > 1e-12) {
          atoms_out.push_back(axis[i]);
          probs_out.push_back(prob[i] / mass);
          renormalized += probs_out.back();
        }
      }
      for (double& p : probs_out) p /= renormalized;
      mixture.emplace_back(std::move(atoms_out), std::move(probs_out));
    }
    double worst = sum_T;
    try {
      auto cert = transport::worst_case_expectation(f, mixture,
                                                    options.validity_tol);
      worst = std::max(worst, cert.primal_value);
    } catch (const std::exception&) {
      // Keep the LP value as the certificate.
    }
    throw NotValidError(
        "dominate: no separable majorant with total bound below 1 + epsilon "
        "exists; the target is not valid at grid scale",
        std::move(mixture), worst);
  }

  // Symmetric targets: average the tables so the weights come out equal.
  if (options.symmetrize && arity > 1 && f.symmetric()) {
    std::vector<double> averaged(f.axis(0).size(), 0.0);
    for (std::size_t k = 0; k < arity; ++k) {
      for (std::size_t i = 0; i < averaged.size(); ++i) {
        averaged[i] += phi[k][i];
      }
    }
    for (double& v : averaged) v /= static_cast<double>(arity);
    for (std::size_t k = 0; k < arity; ++k) phi[k] = averaged;
  }

  // Majorants and weights. The bound is the recomputed supremum of the
  // final tables, so the majorant precondition holds exactly even when the
  // LP sits at its tolerance (and after symmetrization, which changes the
  // tables but never increases the total).
  std::vector<std::pair<double, double>> per_k(arity);
  double recomputed_sum = 0.0;
  for (std::size_t k = 0; k < arity; ++k) {
    const double r = sup_mean_constrained(f.axis(k), phi[k]).value;
    recomputed_sum += r;
    if (r == 0.0) {
      per_k[k] = {0.0, 0.0};
      continue;
    }
    MajorantResult majorant = linear_majorant(f.axis(k), phi[k], r);
    per_k[k] = {r, majorant.h};
  }
  // Assemble the weights lambda_k = T_k h_k / s. Any s with
  //   s >= sum T_k h_k                  (weights fit the simplex),
  //   s >= (1+eps) * sum T_k h_k / ((1+eps) - sum T_k + sum T_k h_k),
  //   s <= 1 + eps
  // turns the affine majorants into f <= (1+eps) M_lambda. Preferring s = 1
  // (feasible whenever sum T_k <= 1, i.e. for every valid target) makes the
  // recovered weights exact instead of biased by a factor 1/(1+eps).
  const double slope_total = [&] {
    double s = 0.0;
    for (const auto& [t, h] : per_k) s += t * h;
    return s;
  }();
  double scale = 1.0;
  if (slope_total > 0.0) {
    const double denominator =
        (1.0 + epsilon) - recomputed_sum + slope_total;
    if (denominator <= 0.0) {
      scale = 1.0 + epsilon;  // the conservative choice, always feasible
    } else {
      const double s_min = (1.0 + epsilon) * slope_total / denominator;
      scale = std::min(std::max({1.0, slope_total, s_min}), 1.0 + epsilon);
    }
  }
  // Negative weights can only be numerical noise; clamping them and letting
  // the constant weight absorb the remainder keeps the bound intact.
  std::vector<double> lambda_entries(arity + 1, 0.0);
  double assigned = 0.0;
  for (std::size_t k = 0; k < arity; ++k) {
    lambda_entries[k] =
        std::max(0.0, per_k[k].first * per_k[k].second / scale);
    assigned += lambda_entries[k];
  }
  if (assigned > 1.0) {
    for (std::size_t k = 0; k < arity; ++k) lambda_entries[k] /= assigned;
    assigned = 1.0;
  }
  lambda_entries[arity] = 1.0 - assigned;

  // Full-grid verification of f <= (1 + epsilon) * M_lambda.
  auto worst = kernels::scan_max(f.node_count(), [&](std::size_t flat) {
    std::vector<std::size_t> idx(arity);
    f.unflatten(flat, idx);
    double merged = lambda_entries[arity];
    for (std::size_t k = 0; k < arity; ++k) {
      merged += lambda_entries[k] * f.axis(k)[idx[k]];
    }
    return f.value_flat(flat) - (1.0 + epsilon) * merged;
  });
  if (worst.value > 1e-8) {
    throw std::logic_error(
        "dominate: internal consistency failure; the assembled weights do "
        "not dominate the target (LP tolerance breach)");
  }
  DominationReport report{
      .lambda = Weights(std::move(lambda_entries)),
      .epsilon = epsilon,
      .theta = f.theta(),
      .max_violation = worst.value,
      .per_k = std::move(per_k),
      .sum_T = recomputed_sum,
  };
  return report;
}

}  // namespace emerge::domination
