#include "emerge/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "emerge/kernels.hpp"

namespace emerge::transport {

namespace {

constexpr double kDominationTol = 1e-9;

// Fills in dual values at axis positions the LP did not cover, one axis at a
// time: the new value is the smallest one that keeps domination at every
// node whose other coordinates are already covered. Positions of axes before
// k range over the full axis, positions after k over the covered set only;
// by induction the final tables dominate f on the whole product grid.
std::vector<std::vector<double>> extend_dual_tables(
    const GridFunction& f,
    const std::vector<std::vector<std::size_t>>& covered_positions,
    const std::vector<std::vector<double>>& phi_on_covered) {
  const std::size_t arity = f.arity();
  std::vector<std::vector<double>> full(arity);
  std::vector<std::vector<bool>> known(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    full[k].assign(f.axis(k).size(), 0.0);
    known[k].assign(f.axis(k).size(), false);
    for (std::size_t i = 0; i < covered_positions[k].size(); ++i) {
      full[k][covered_positions[k][i]] = phi_on_covered[k][i];
      known[k][covered_positions[k][i]] = true;
    }
  }
  std::vector<std::size_t> node(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    for (std::size_t x = 0; x < full[k].size(); ++x) {
      if (known[k][x]) continue;
      // Ranges: full axes below k, the covered sets above k.
      std::vector<std::vector<std::size_t>> ranges(arity);
      for (std::size_t m = 0; m < arity; ++m) {
        if (m < k) {
          ranges[m].resize(f.axis(m).size());
          std::iota(ranges[m].begin(), ranges[m].end(), 0);
        } else if (m == k) {
          ranges[m] = {x};
        } else {
          ranges[m] = covered_positions[m];
        }
      }
      double needed = 0.0;
      std::vector<std::size_t> odo(arity, 0);
      while (true) {
        double rest = 0.0;
        for (std::size_t m = 0; m < arity; ++m) {
          node[m] = ranges[m][odo[m]];
          if (m != k) rest += full[m][node[m]];
        }
        needed = std::max(needed, f.value_at(node) - rest);
        std::size_t m = arity;
        bool carry = true;
        while (m-- > 0 && carry) {
          if (++odo[m] < ranges[m].size()) {
            carry = false;
          } else {
            odo[m] = 0;
          }
        }
        if (carry) break;
      }
      full[k][x] = needed;
      known[k][x] = true;
    }
  }
  return full;
}

}  // namespace

SeparableDual::SeparableDual(std::vector<std::vector<double>> phi,
                             const GridFunction& f, bool normalized)
    : phi_(std::move(phi)), axes_(f.axes()), normalized_(normalized) {
  if (phi_.size() != f.arity()) {
    throw std::invalid_argument("SeparableDual: component count mismatch");
  }
  for (std::size_t k = 0; k < phi_.size(); ++k) {
    if (phi_[k].size() != f.axis(k).size()) {
      throw std::invalid_argument("SeparableDual: table size mismatch on axis " +
                                  std::to_string(k));
    }
    for (double v : phi_[k]) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("SeparableDual: non-finite value");
      }
      if (normalized_ && (v < -kArithmeticTol || v > 1.0 + kArithmeticTol)) {
        throw std::invalid_argument(
            "SeparableDual: normalized components must lie in [0, 1]");
      }
    }
  }
  std::vector<std::size_t> index(phi_.size());
  auto violation = kernels::scan_max(f.node_count(), [&](std::size_t flat) {
    std::vector<std::size_t> idx(phi_.size());
    f.unflatten(flat, idx);
    double sum = 0.0;
    for (std::size_t k = 0; k < phi_.size(); ++k) sum += phi_[k][idx[k]];
    return f.value_flat(flat) - sum;
  });
  min_slack_ = -violation.value;
  if (violation.value > kDominationTol) {
    throw FeasibilityError(
        "SeparableDual: sum of components falls below the target by " +
        std::to_string(violation.value));
  }
}

double SeparableDual::marginal_sum_integral(
    std::span<const DiscreteDistribution> marginals) const {
  if (marginals.size() != phi_.size()) {
    throw std::invalid_argument("marginal_sum_integral: arity mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < phi_.size(); ++k) {
    const auto& axis = axes_[k];
    for (std::size_t i = 0; i < marginals[k].size(); ++i) {
      const double atom = marginals[k].atom(i);
      auto it = std::lower_bound(axis.begin(), axis.end(),
                                 atom - kArithmeticTol);
      if (it == axis.end() || std::fabs(*it - atom) > kArithmeticTol) {
        throw AlignmentError("marginal_sum_integral: atom off the axis");
      }
      total += marginals[k].prob(i) *
               phi_[k][static_cast<std::size_t>(it - axis.begin())];
    }
  }
  return total;
}

TransportCertificate worst_case_expectation(
    const GridFunction& f, std::span<const DiscreteDistribution> marginals,
    double verdict_tol) {
  const std::size_t arity = f.arity();
  if (marginals.size() != arity || arity == 0) {
    throw std::invalid_argument(
        "worst_case_expectation: marginal count must match the grid arity");
  }
  // Zero-probability atoms are dropped before solving; they do not change
  // the value and keep the bases clean.
  std::vector<DiscreteDistribution> active;
  active.reserve(arity);
  for (const auto& mu : marginals) {
    if (!mu.is_evalue_law()) {
      throw std::invalid_argument(
          "worst_case_expectation: marginal mean exceeds 1");
    }
    active.push_back(mu.without_null_atoms());
  }

  std::vector<std::vector<std::size_t>> positions(arity);
  std::vector<std::size_t> shape(arity);
  std::size_t cells = 1;
  for (std::size_t k = 0; k < arity; ++k) {
    positions[k].reserve(active[k].size());
    for (std::size_t i = 0; i < active[k].size(); ++i) {
      positions[k].push_back(f.axis_index_of(k, active[k].atom(i)));
    }
    shape[k] = active[k].size();
    cells *= shape[k];
  }
  if (cells > 200000) {
    throw std::invalid_argument(
        "worst_case_expectation: joint support too large for the dense "
        "solver");
  }

  // Primal: max sum_x pi(x) f(x) over the transportation polytope, solved
  // as a minimization of -f.
  lp::Problem problem;
  problem.num_vars = cells;
  problem.objective.assign(cells, 0.0);
  std::vector<std::size_t> node(arity);
  std::vector<std::size_t> odo(arity, 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t k = 0; k < arity; ++k) node[k] = positions[k][odo[k]];
    problem.objective[cell] = -f.value_at(node);
    std::size_t k = arity;
    bool carry = true;
    while (k-- > 0 && carry) {
      if (++odo[k] < shape[k]) {
        carry = false;
      } else {
        odo[k] = 0;
      }
    }
  }
  std::vector<std::size_t> row_of;  // flattened (k, atom) -> row
  std::vector<std::size_t> row_offset(arity, 0);
  std::size_t rows = 0;
  for (std::size_t k = 0; k < arity; ++k) {
    row_offset[k] = rows;
    rows += shape[k];
  }
  problem.constraints.assign(rows, lp::Constraint{});
  for (std::size_t r = 0; r < rows; ++r) {
    problem.constraints[r].coeffs.assign(cells, 0.0);
    problem.constraints[r].rel = lp::Relation::eq;
  }
  for (std::size_t k = 0; k < arity; ++k) {
    for (std::size_t i = 0; i < shape[k]; ++i) {
      problem.constraints[row_offset[k] + i].rhs = active[k].prob(i);
    }
  }
  std::fill(odo.begin(), odo.end(), 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t k = 0; k < arity; ++k) {
      problem.constraints[row_offset[k] + odo[k]].coeffs[cell] = 1.0;
    }
    std::size_t k = arity;
    bool carry = true;
    while (k-- > 0 && carry) {
      if (++odo[k] < shape[k]) {
        carry = false;
      } else {
        odo[k] = 0;
      }
    }
  }

  lp::Solution sol = lp::minimize(problem);
  if (sol.status != lp::Status::optimal) {
    throw lp::SolverError("worst_case_expectation: LP did not reach optimality",
                          sol.status, -sol.objective,
                          std::numeric_limits<double>::infinity());
  }

  const double primal = -sol.objective;

  // Optimal coupling from the basic solution; only basic cells are nonzero.
  std::vector<CouplingEntry> entries;
  std::fill(odo.begin(), odo.end(), 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double mass = sol.x[cell];
    if (mass < 0.0) {
      if (mass < -1e-9) {
        throw lp::SolverError("worst_case_expectation: negative mass in basis",
                              lp::Status::optimal, primal, primal);
      }
      mass = 0.0;
    }
    if (mass > 0.0) {
      entries.push_back({odo, mass});
    }
    std::size_t k = arity;
    bool carry = true;
    while (k-- > 0 && carry) {
      if (++odo[k] < shape[k]) {
        carry = false;
      } else {
        odo[k] = 0;
      }
    }
  }
  Coupling coupling(active, std::move(entries));

  // Dual tables from the optimal basis, extended to the full axes.
  std::vector<std::vector<double>> phi_on_atoms(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    phi_on_atoms[k].resize(shape[k]);
    for (std::size_t i = 0; i < shape[k]; ++i) {
      phi_on_atoms[k][i] = -sol.duals[row_offset[k] + i];
    }
  }
  SeparableDual dual(extend_dual_tables(f, positions, phi_on_atoms), f);

  TransportCertificate cert{
      .primal_value = primal,
      .dual_value = dual.marginal_sum_integral(marginals),
      .gap = 0.0,
      .coupling = std::move(coupling),
      .dual = std::move(dual),
      .verdict = Verdict::boundary,
      .lp_primal_residual = sol.primal_residual,
      .lp_dual_residual = sol.dual_residual,
      .lp_iterations = sol.iterations,
  };
  cert.gap = cert.dual_value - cert.primal_value;
  if (cert.gap < -1e-8) {
    throw lp::SolverError("worst_case_expectation: weak duality violated",
                          lp::Status::optimal, cert.primal_value,
                          cert.dual_value);
  }
  if (std::fabs(cert.gap) > kLpTol) {
    throw lp::SolverError("worst_case_expectation: duality gap above tolerance",
                          lp::Status::optimal, cert.primal_value,
                          cert.dual_value);
  }
  if (cert.primal_value > 1.0 + verdict_tol) {
    cert.verdict = Verdict::invalid;
  } else if (cert.primal_value >= 1.0 - verdict_tol) {
    cert.verdict = Verdict::boundary;
  } else {
    cert.verdict = Verdict::valid;
  }
  return cert;
}

AdversaryResult binary_adversary(const GridFunction& f, const EValueVector& e) {
  if (e.size() != f.arity()) {
    throw std::invalid_argument("binary_adversary: arity mismatch");
  }
  const double e_max = e.max();
  if (!(e_max > 1.0)) {
    throw std::domain_error(
        "binary_adversary: requires max(e) > 1 for a mean-1 two-point law");
  }
  std::vector<std::size_t> at_e(f.arity()), at_zero(f.arity());
  for (std::size_t k = 0; k < f.arity(); ++k) {
    at_e[k] = f.axis_index_of(k, e[k]);
    at_zero[k] = f.axis_index_of(k, 0.0);
  }
  const double p_hit = 1.0 / e_max;

  std::vector<DiscreteDistribution> marginals;
  std::vector<std::size_t> e_atom_index(f.arity());
  marginals.reserve(f.arity());
  for (std::size_t k = 0; k < f.arity(); ++k) {
    if (e[k] == 0.0) {
      marginals.push_back(DiscreteDistribution::point_mass(0.0));
      e_atom_index[k] = 0;
    } else {
      marginals.push_back(
          DiscreteDistribution::two_point(0.0, 1.0 - p_hit, e[k], p_hit));
      e_atom_index[k] = 1;
    }
  }
  std::vector<CouplingEntry> entries;
  entries.push_back({std::vector<std::size_t>(f.arity(), 0), 1.0 - p_hit});
  entries.push_back({e_atom_index, p_hit});
  Coupling coupling(marginals, std::move(entries));

  AdversaryResult out{
      .marginals = std::move(marginals),
      .coupling = std::move(coupling),
      .expectation =
          f.value_at(at_e) * p_hit + f.value_at(at_zero) * (1.0 - p_hit),
  };
  return out;
}

SeparableDual normalize_dual(const SeparableDual& phi, const GridFunction& f) {
  if (f.max_value() > 1.0 + kDominationTol) {
    throw std::invalid_argument(
        "normalize_dual: expects the target rescaled to be bounded by 1");
  }
  const std::size_t arity = f.arity();
  if (phi.arity() != arity) {
    throw std::invalid_argument("normalize_dual: arity mismatch");
  }
  // Re-validate domination against this target; the shift below relies on it.
  std::vector<std::size_t> idx(arity);
  for (std::size_t flat = 0; flat < f.node_count(); ++flat) {
    f.unflatten(flat, idx);
    double sum = 0.0;
    for (std::size_t k = 0; k < arity; ++k) sum += phi.component(k)[idx[k]];
    if (sum < f.value_flat(flat) - kDominationTol) {
      throw FeasibilityError("normalize_dual: input does not dominate the target");
    }
  }
  std::vector<double> lows(arity);
  double low_sum = 0.0;
  for (std::size_t k = 0; k < arity; ++k) {
    lows[k] = *std::min_element(phi.component(k).begin(),
                                phi.component(k).end());
    low_sum += lows[k];
  }
  // Shift: subtract each component's minimum and redistribute the total
  // evenly. This leaves every marginal-sum integral unchanged and makes the
  // components nonnegative; the final clamp to [0, 1] keeps domination
  // because the target is bounded by 1.
  std::vector<std::vector<double>> shifted(arity);
  const double redistribute = low_sum / static_cast<double>(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    shifted[k].reserve(phi.component(k).size());
    for (double v : phi.component(k)) {
      double s = v - lows[k] + redistribute;
      shifted[k].push_back(std::clamp(s, 0.0, 1.0));
    }
  }
  return SeparableDual(std::move(shifted), f, /*normalized=*/true);
}

}  // namespace emerge::transport
