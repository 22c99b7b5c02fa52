#include "emerge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace emerge::oracle {

namespace {

constexpr double kFlowTol = 1e-12;

// Axis position of every atom of every marginal.
std::vector<std::vector<std::size_t>> atom_positions(
    const GridFunction& f, std::span<const DiscreteDistribution> marginals) {
  std::vector<std::vector<std::size_t>> pos(marginals.size());
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    pos[k].reserve(marginals[k].size());
    for (std::size_t i = 0; i < marginals[k].size(); ++i) {
      pos[k].push_back(f.axis_index_of(k, marginals[k].atom(i)));
    }
  }
  return pos;
}

double coupling_value(const GridFunction& f,
                      const std::vector<std::vector<std::size_t>>& pos,
                      const std::vector<std::vector<std::size_t>>& cells,
                      const std::vector<double>& mass) {
  std::vector<std::size_t> node(pos.size());
  double value = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (mass[c] <= 0.0) continue;
    for (std::size_t k = 0; k < pos.size(); ++k) {
      node[k] = pos[k][cells[c][k]];
    }
    value += mass[c] * f.value_at(node);
  }
  return value;
}

double unique_coupling_value(const SmallInstance& inst) {
  const auto& mu = inst.marginals[0];
  double value = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    std::size_t node = inst.f.axis_index_of(0, mu.atom(i));
    value += mu.prob(i) * inst.f.value_flat(node);
  }
  return value;
}

// Every vertex of the two-marginal transportation polytope corresponds to a
// spanning tree of the bipartite supply/demand graph; enumerate all of them
// and keep the feasible ones.
double two_marginal_vertex_max(const SmallInstance& inst) {
  const auto rows = inst.marginals[0].without_null_atoms();
  const auto cols = inst.marginals[1].without_null_atoms();
  const std::size_t m = rows.size();
  const std::size_t n = cols.size();
  const std::size_t cells = m * n;
  const std::size_t basis_size = m + n - 1;
  const auto pos = atom_positions(inst.f, std::vector<DiscreteDistribution>{rows, cols});

  std::vector<std::size_t> pick(basis_size);
  std::iota(pick.begin(), pick.end(), 0);
  double best = -1.0;
  bool done = false;
  while (!done) {
    // Check the picked cell set for acyclicity over the m + n node graph.
    std::vector<std::size_t> parent(m + n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    bool tree = true;
    for (std::size_t c : pick) {
      std::size_t a = find(c / n), b = find(m + c % n);
      if (a == b) {
        tree = false;
        break;
      }
      parent[a] = b;
    }
    if (tree) {
      // Leaf-strip the tree to compute the unique flows.
      std::vector<double> supply(m + n);
      for (std::size_t i = 0; i < m; ++i) supply[i] = rows.prob(i);
      for (std::size_t j = 0; j < n; ++j) supply[m + j] = cols.prob(j);
      std::vector<std::size_t> degree(m + n, 0);
      std::vector<bool> used(basis_size, false);
      for (std::size_t c : pick) {
        ++degree[c / n];
        ++degree[m + c % n];
      }
      std::vector<double> flow(basis_size, 0.0);
      bool feasible = true;
      for (std::size_t step = 0; step < basis_size; ++step) {
        std::size_t leaf_edge = basis_size;
        for (std::size_t e = 0; e < basis_size; ++e) {
          if (used[e]) continue;
          std::size_t r = pick[e] / n, c = m + pick[e] % n;
          if (degree[r] == 1 || degree[c] == 1) {
            leaf_edge = e;
            break;
          }
        }
        if (leaf_edge == basis_size) {
          feasible = false;
          break;
        }
        std::size_t r = pick[leaf_edge] / n, c = m + pick[leaf_edge] % n;
        std::size_t leaf = degree[r] == 1 ? r : c;
        std::size_t other = degree[r] == 1 ? c : r;
        flow[leaf_edge] = supply[leaf];
        if (flow[leaf_edge] < -kFlowTol) {
          feasible = false;
          break;
        }
        supply[other] -= flow[leaf_edge];
        supply[leaf] = 0.0;
        used[leaf_edge] = true;
        --degree[r];
        --degree[c];
      }
      if (feasible) {
        double value = 0.0;
        std::vector<std::size_t> node(2);
        for (std::size_t e = 0; e < basis_size; ++e) {
          if (flow[e] <= 0.0) continue;
          node[0] = pos[0][pick[e] / n];
          node[1] = pos[1][pick[e] % n];
          value += flow[e] * inst.f.value_at(node);
        }
        best = std::max(best, value);
      }
    }
    // Next combination of basis_size cells out of `cells`.
    std::size_t i = basis_size;
    while (i > 0) {
      --i;
      if (pick[i] + (basis_size - i) < cells) {
        ++pick[i];
        for (std::size_t j = i + 1; j < basis_size; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (i == 0) done = true;
    }
  }
  return best;
}

struct DenseCoupling {
  std::vector<std::vector<std::size_t>> cells;
  std::vector<double> mass;
};

DenseCoupling greedy_fill(std::span<const DiscreteDistribution> marginals,
                          const std::vector<std::vector<std::size_t>>& orders) {
  const std::size_t arity = marginals.size();
  std::vector<std::vector<double>> remaining(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    remaining[k] = marginals[k].probs();
  }
  DenseCoupling out;
  std::vector<std::size_t> odo(arity, 0);
  std::vector<std::size_t> shape(arity);
  for (std::size_t k = 0; k < arity; ++k) shape[k] = marginals[k].size();
  while (true) {
    std::vector<std::size_t> cell(arity);
    for (std::size_t k = 0; k < arity; ++k) cell[k] = orders[k][odo[k]];
    double m = remaining[0][cell[0]];
    for (std::size_t k = 1; k < arity; ++k) {
      m = std::min(m, remaining[k][cell[k]]);
    }
    if (m > 0.0) {
      for (std::size_t k = 0; k < arity; ++k) remaining[k][cell[k]] -= m;
      out.cells.push_back(cell);
      out.mass.push_back(m);
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
    if (carry) break;
  }
  return out;
}

// Exhaustive two-cell mass swaps: move mass from cells (c, d) onto the pair
// obtained by exchanging a subset of coordinates, which preserves all
// marginals. Repeats until no swap improves the value.
void refine_by_swaps(const GridFunction& f,
                     const std::vector<std::vector<std::size_t>>& pos,
                     DenseCoupling& coupling, unsigned passes) {
  const std::size_t arity = pos.size();
  auto node_value = [&](const std::vector<std::size_t>& cell) {
    std::vector<std::size_t> node(arity);
    for (std::size_t k = 0; k < arity; ++k) node[k] = pos[k][cell[k]];
    return f.value_at(node);
  };
  auto compact = [&coupling]() {
    std::map<std::vector<std::size_t>, double> merged;
    for (std::size_t c = 0; c < coupling.cells.size(); ++c) {
      if (coupling.mass[c] > kFlowTol) merged[coupling.cells[c]] += coupling.mass[c];
    }
    coupling.cells.clear();
    coupling.mass.clear();
    for (auto& [cell, m] : merged) {
      coupling.cells.push_back(cell);
      coupling.mass.push_back(m);
    }
  };
  for (unsigned pass = 0; pass < passes; ++pass) {
    compact();
    bool improved = false;
    for (std::size_t a = 0; a < coupling.cells.size(); ++a) {
      if (coupling.mass[a] <= kFlowTol) continue;
      for (std::size_t b = a + 1; b < coupling.cells.size(); ++b) {
        if (coupling.mass[b] <= kFlowTol) continue;
        std::vector<std::size_t> differ;
        for (std::size_t k = 0; k < arity; ++k) {
          if (coupling.cells[a][k] != coupling.cells[b][k]) differ.push_back(k);
        }
        if (differ.size() < 2) continue;
        const double va = node_value(coupling.cells[a]);
        const double vb = node_value(coupling.cells[b]);
        // Proper nonempty subsets of the differing coordinates.
        for (std::size_t bits = 1; bits + 1 < (1u << differ.size()); ++bits) {
          std::vector<std::size_t> e = coupling.cells[a];
          std::vector<std::size_t> g = coupling.cells[b];
          for (std::size_t t = 0; t < differ.size(); ++t) {
            if (bits & (1u << t)) std::swap(e[differ[t]], g[differ[t]]);
          }
          const double gain = node_value(e) + node_value(g) - va - vb;
          if (gain > 1e-13) {
            const double delta = std::min(coupling.mass[a], coupling.mass[b]);
            coupling.mass[a] -= delta;
            coupling.mass[b] -= delta;
            coupling.cells.push_back(e);
            coupling.mass.push_back(delta);
            coupling.cells.push_back(g);
            coupling.mass.push_back(delta);
            improved = true;
            break;
          }
        }
        if (coupling.mass[a] <= kFlowTol) break;
      }
    }
    // Cyclic rotations over three cells: coordinate k of the new triple is
    // drawn from cells (a, b, c) shifted by one; every atom keeps its total
    // mass, so marginals are preserved.
    if (!improved && arity == 3) {
      const std::size_t count = coupling.cells.size();
      for (std::size_t a = 0; a < count && !improved; ++a) {
        if (coupling.mass[a] <= kFlowTol) continue;
        for (std::size_t b = a + 1; b < count && !improved; ++b) {
          if (coupling.mass[b] <= kFlowTol) continue;
          for (std::size_t c = b + 1; c < count && !improved; ++c) {
            if (coupling.mass[c] <= kFlowTol) continue;
            const auto& ca = coupling.cells[a];
            const auto& cb = coupling.cells[b];
            const auto& cc = coupling.cells[c];
            const double base =
                node_value(ca) + node_value(cb) + node_value(cc);
            for (int direction = 0; direction < 2 && !improved; ++direction) {
              std::vector<std::size_t> e1(3), e2(3), e3(3);
              if (direction == 0) {
                e1 = {ca[0], cb[1], cc[2]};
                e2 = {cb[0], cc[1], ca[2]};
                e3 = {cc[0], ca[1], cb[2]};
              } else {
                e1 = {ca[0], cc[1], cb[2]};
                e2 = {cb[0], ca[1], cc[2]};
                e3 = {cc[0], cb[1], ca[2]};
              }
              const double gain =
                  node_value(e1) + node_value(e2) + node_value(e3) - base;
              if (gain > 1e-13) {
                const double delta = std::min(
                    {coupling.mass[a], coupling.mass[b], coupling.mass[c]});
                coupling.mass[a] -= delta;
                coupling.mass[b] -= delta;
                coupling.mass[c] -= delta;
                coupling.cells.push_back(e1);
                coupling.mass.push_back(delta);
                coupling.cells.push_back(e2);
                coupling.mass.push_back(delta);
                coupling.cells.push_back(e3);
                coupling.mass.push_back(delta);
                improved = true;
              }
            }
          }
        }
      }
    }
    if (!improved) break;
  }
}

double three_marginal_scan_max(const SmallInstance& inst,
                               unsigned refinement_passes) {
  std::vector<DiscreteDistribution> active;
  active.reserve(3);
  for (const auto& mu : inst.marginals) active.push_back(mu.without_null_atoms());
  const auto pos = atom_positions(inst.f, active);

  std::vector<std::vector<std::vector<std::size_t>>> perms(3);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<std::size_t> order(active[k].size());
    std::iota(order.begin(), order.end(), 0);
    do {
      perms[k].push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
  }

  // Keep the strongest greedy couplings and refine each of them; distinct
  // starts escape different local optima of the swap neighborhood.
  constexpr std::size_t kStarts = 24;
  std::vector<std::pair<double, DenseCoupling>> leaders;
  for (const auto& p0 : perms[0]) {
    for (const auto& p1 : perms[1]) {
      for (const auto& p2 : perms[2]) {
        DenseCoupling c = greedy_fill(active, {p0, p1, p2});
        double value = coupling_value(inst.f, pos, c.cells, c.mass);
        if (leaders.size() < kStarts || value > leaders.back().first) {
          leaders.emplace_back(value, std::move(c));
          std::sort(leaders.begin(), leaders.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first;
                    });
          if (leaders.size() > kStarts) leaders.pop_back();
        }
      }
    }
  }
  double best = -1.0;
  for (auto& [value, coupling] : leaders) {
    refine_by_swaps(inst.f, pos, coupling, refinement_passes);
    best = std::max(
        {best, value,
         coupling_value(inst.f, pos, coupling.cells, coupling.mass)});
  }
  return best;
}

}  // namespace

SmallInstance::SmallInstance(GridFunction f_in,
                             std::vector<DiscreteDistribution> marginals_in)
    : f(std::move(f_in)), marginals(std::move(marginals_in)) {
  if (f.arity() != marginals.size() || marginals.empty() ||
      marginals.size() > 3) {
    throw std::invalid_argument("SmallInstance: needs 1 to 3 marginals");
  }
  std::size_t joint = 1;
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    if (marginals[k].size() > 4) {
      throw std::invalid_argument("SmallInstance: more than 4 atoms per marginal");
    }
    joint *= marginals[k].size();
    for (std::size_t i = 0; i < marginals[k].size(); ++i) {
      f.axis_index_of(k, marginals[k].atom(i));  // must align
    }
  }
  if (joint > 64) {
    throw std::invalid_argument("SmallInstance: joint support exceeds 64");
  }
}

double enumerate_couplings_value(const SmallInstance& instance,
                                 unsigned refinement_passes) {
  switch (instance.marginals.size()) {
    case 1:
      return unique_coupling_value(instance);
    case 2:
      return two_marginal_vertex_max(instance);
    default:
      return three_marginal_scan_max(instance, refinement_passes);
  }
}

double enumerate_binary_mean_laws(std::span<const double> axis,
                                  std::span<const double> values) {
  if (axis.size() != values.size() || axis.empty()) {
    throw std::invalid_argument("enumerate_binary_mean_laws: size mismatch");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (axis[i] <= 1.0 + kArithmeticTol) best = std::max(best, values[i]);
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] < 1.0)) continue;
    for (std::size_t j = 0; j < axis.size(); ++j) {
      if (!(axis[j] > 1.0)) continue;
      const double x = axis[i], y = axis[j];
      const double w_high = (1.0 - x) / (y - x);
      best = std::max(best, (1.0 - w_high) * values[i] + w_high * values[j]);
    }
    // Pairs below 1 are dominated by their endpoints; scanned anyway.
    for (std::size_t j = i + 1; j < axis.size(); ++j) {
      if (axis[j] > 1.0 + kArithmeticTol) continue;
      for (double w : {0.25, 0.5, 0.75}) {
        best = std::max(best, (1.0 - w) * values[i] + w * values[j]);
      }
    }
  }
  return best;
}

Coupling greedy_coupling(
    std::vector<DiscreteDistribution> marginals,
    const std::vector<std::vector<std::size_t>>& atom_orders) {
  if (atom_orders.size() != marginals.size()) {
    throw std::invalid_argument("greedy_coupling: order count mismatch");
  }
  DenseCoupling dense = greedy_fill(marginals, atom_orders);
  std::vector<CouplingEntry> entries;
  entries.reserve(dense.cells.size());
  for (std::size_t c = 0; c < dense.cells.size(); ++c) {
    entries.push_back({dense.cells[c], dense.mass[c]});
  }
  return Coupling(std::move(marginals), std::move(entries));
}

}  // namespace emerge::oracle
