#include "emerge/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emerge::lp {

namespace {

// Tableau state for one solve. Columns: original variables, then slack and
// surplus variables, then one artificial per ge/eq row. Every row has an
// identity column (slack for le rows, artificial otherwise), which is where
// the duals are read off at the end.
class Tableau {
 public:
  Tableau(const Problem& p, const Options& opt) : problem_(p), tol_(opt.tol) {
    const std::size_t m = p.constraints.size();
    const std::size_t n = p.num_vars;

    flipped_.assign(m, false);
    std::vector<Relation> rel(m);
    for (std::size_t i = 0; i < m; ++i) {
      rel[i] = p.constraints[i].rel;
      if (p.constraints[i].rhs < 0.0) {
        flipped_[i] = true;
        if (rel[i] == Relation::le) {
          rel[i] = Relation::ge;
        } else if (rel[i] == Relation::ge) {
          rel[i] = Relation::le;
        }
      }
    }

    std::size_t n_slack = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (rel[i] != Relation::eq) ++n_slack;
    }
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (rel[i] != Relation::le) ++n_art;
    }
    cols_ = n + n_slack + n_art;
    width_ = cols_ + 1;  // trailing rhs column
    rows_.assign(m * width_, 0.0);
    basis_.assign(m, 0);
    identity_col_.assign(m, 0);
    banned_.assign(cols_, false);
    is_artificial_.assign(cols_, false);

    std::size_t next_col = n;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& c = p.constraints[i];
      const double sign = flipped_[i] ? -1.0 : 1.0;
      double* row = row_ptr(i);
      for (std::size_t j = 0; j < n; ++j) row[j] = sign * c.coeffs[j];
      row[cols_] = sign * c.rhs;
      if (rel[i] == Relation::le) {
        row[next_col] = 1.0;
        identity_col_[i] = next_col;
        basis_[i] = next_col;
        ++next_col;
      } else if (rel[i] == Relation::ge) {
        row[next_col] = -1.0;  // surplus
        ++next_col;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (rel[i] == Relation::le) continue;
      double* row = row_ptr(i);
      row[next_col] = 1.0;
      identity_col_[i] = next_col;
      basis_[i] = next_col;
      is_artificial_[next_col] = true;
      ++next_col;
    }
  }

  Solution solve(std::size_t max_iterations) {
    Solution result;

    // Phase 1: minimize the sum of artificial variables.
    std::vector<double> phase1_cost(cols_, 0.0);
    bool any_artificial = false;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_artificial_[j]) {
        phase1_cost[j] = 1.0;
        any_artificial = true;
      }
    }
    if (any_artificial) {
      load_objective(phase1_cost);
      Status s = run(max_iterations, /*ban_artificials=*/false);
      result.iterations = iterations_;
      if (s != Status::optimal) {
        result.status = s == Status::unbounded ? Status::infeasible : s;
        fill_primal(result);
        return result;
      }
      if (objective_value() > tol_ * std::max<double>(1.0, rhs_scale())) {
        result.status = Status::infeasible;
        fill_primal(result);
        return result;
      }
      drive_out_artificials();
      for (std::size_t j = 0; j < cols_; ++j) {
        if (is_artificial_[j]) banned_[j] = true;
      }
    }

    // Phase 2: the real objective.
    std::vector<double> cost(cols_, 0.0);
    for (std::size_t j = 0; j < problem_.num_vars; ++j) {
      cost[j] = problem_.objective[j];
    }
    load_objective(cost);
    Status s = run(max_iterations, /*ban_artificials=*/true);
    result.iterations += iterations_;
    result.status = s;
    fill_primal(result);
    fill_duals(result);
    result.objective = 0.0;
    for (std::size_t j = 0; j < problem_.num_vars; ++j) {
      result.objective += problem_.objective[j] * result.x[j];
    }
    compute_residuals(result);
    return result;
  }

 private:
  double* row_ptr(std::size_t i) { return rows_.data() + i * width_; }
  const double* row_ptr(std::size_t i) const {
    return rows_.data() + i * width_;
  }
  std::size_t num_rows() const { return problem_.constraints.size(); }

  double rhs_scale() const {
    double s = 0.0;
    for (std::size_t i = 0; i < num_rows(); ++i) {
      s = std::max(s, std::fabs(problem_.constraints[i].rhs));
    }
    return s;
  }

  // Reduced costs for the given cost vector under the current basis.
  void load_objective(const std::vector<double>& cost) {
    obj_row_.assign(width_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) obj_row_[j] = cost[j];
    for (std::size_t i = 0; i < num_rows(); ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = row_ptr(i);
      for (std::size_t j = 0; j < width_; ++j) obj_row_[j] -= cb * row[j];
    }
  }

  double objective_value() const { return -obj_row_[cols_]; }

  void pivot(std::size_t r, std::size_t s) {
    double* prow = row_ptr(r);
    const double inv = 1.0 / prow[s];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[s] = 1.0;
    for (std::size_t i = 0; i < num_rows(); ++i) {
      if (i == r) continue;
      double* row = row_ptr(i);
      const double factor = row[s];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= factor * prow[j];
      row[s] = 0.0;
    }
    const double factor = obj_row_[s];
    if (factor != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) {
        obj_row_[j] -= factor * prow[j];
      }
      obj_row_[s] = 0.0;
    }
    basis_[r] = s;
  }

  Status run(std::size_t max_iterations, bool ban_artificials) {
    iterations_ = 0;
    std::size_t stall = 0;
    bool bland = false;
    double last_objective = objective_value();
    const std::size_t stall_limit = 50 + num_rows() + cols_;

    while (true) {
      if (iterations_ >= max_iterations) return Status::iteration_limit;

      // Entering column.
      std::size_t enter = cols_;
      if (bland) {
        for (std::size_t j = 0; j < cols_; ++j) {
          if (banned_[j] || (ban_artificials && is_artificial_[j])) continue;
          if (obj_row_[j] < -tol_) {
            enter = j;
            break;
          }
        }
      } else {
        double best = -tol_;
        for (std::size_t j = 0; j < cols_; ++j) {
          if (banned_[j] || (ban_artificials && is_artificial_[j])) continue;
          if (obj_row_[j] < best) {
            best = obj_row_[j];
            enter = j;
          }
        }
      }
      if (enter == cols_) return Status::optimal;

      // Ratio test: exact minimum first, then Bland tie-break on the
      // smallest basis index among rows within tolerance of it.
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < num_rows(); ++i) {
        const double a = row_ptr(i)[enter];
        if (a <= tol_) continue;
        best_ratio = std::min(best_ratio, row_ptr(i)[cols_] / a);
      }
      if (!std::isfinite(best_ratio)) return Status::unbounded;
      std::size_t leave = num_rows();
      for (std::size_t i = 0; i < num_rows(); ++i) {
        const double a = row_ptr(i)[enter];
        if (a <= tol_) continue;
        if (row_ptr(i)[cols_] / a > best_ratio + tol_) continue;
        if (leave == num_rows() || basis_[i] < basis_[leave]) leave = i;
      }

      const std::size_t leaving_col = basis_[leave];
      pivot(leave, enter);
      if (is_artificial_[leaving_col]) banned_[leaving_col] = true;
      ++iterations_;

      const double obj = objective_value();
      if (obj < last_objective - 1e-12) {
        last_objective = obj;
        stall = 0;
      } else if (!bland && ++stall > stall_limit) {
        bland = true;
      }
    }
  }

  // After phase 1, pivot basic artificials onto structural columns where
  // possible; rows admitting no pivot are linearly dependent and keep their
  // zero-valued artificial.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < num_rows(); ++i) {
      if (!is_artificial_[basis_[i]]) continue;
      const double* row = row_ptr(i);
      std::size_t best = cols_;
      double best_mag = tol_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (is_artificial_[j] || banned_[j]) continue;
        const double mag = std::fabs(row[j]);
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best != cols_) {
        const std::size_t old = basis_[i];
        pivot(i, best);
        banned_[old] = true;
      }
    }
  }

  void fill_primal(Solution& out) const {
    out.x.assign(problem_.num_vars, 0.0);
    for (std::size_t i = 0; i < num_rows(); ++i) {
      if (basis_[i] < problem_.num_vars) {
        out.x[basis_[i]] = row_ptr(i)[cols_];
      }
    }
  }

  void fill_duals(Solution& out) const {
    out.duals.assign(num_rows(), 0.0);
    for (std::size_t i = 0; i < num_rows(); ++i) {
      // The identity column carries -y_i in the reduced-cost row.
      double y = -obj_row_[identity_col_[i]];
      out.duals[i] = flipped_[i] ? -y : y;
    }
  }

  void compute_residuals(Solution& out) const {
    double primal = 0.0;
    for (std::size_t i = 0; i < num_rows(); ++i) {
      const auto& c = problem_.constraints[i];
      double ax = 0.0;
      for (std::size_t j = 0; j < problem_.num_vars; ++j) {
        ax += c.coeffs[j] * out.x[j];
      }
      double violation = 0.0;
      switch (c.rel) {
        case Relation::eq:
          violation = std::fabs(ax - c.rhs);
          break;
        case Relation::ge:
          violation = std::max(0.0, c.rhs - ax);
          break;
        case Relation::le:
          violation = std::max(0.0, ax - c.rhs);
          break;
      }
      primal = std::max(primal, violation);
    }
    double dual = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_artificial_[j]) continue;
      dual = std::max(dual, -obj_row_[j]);
    }
    out.primal_residual = primal;
    out.dual_residual = dual;
  }

  const Problem& problem_;
  double tol_;
  std::size_t cols_ = 0;
  std::size_t width_ = 0;
  std::vector<double> rows_;
  std::vector<double> obj_row_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> identity_col_;
  std::vector<bool> flipped_;
  std::vector<bool> banned_;
  std::vector<bool> is_artificial_;
  std::size_t iterations_ = 0;
};

}  // namespace

Solution minimize(const Problem& problem, const Options& options) {
  if (problem.objective.size() != problem.num_vars) {
    throw std::invalid_argument("lp::minimize: objective size mismatch");
  }
  for (const auto& c : problem.constraints) {
    if (c.coeffs.size() != problem.num_vars) {
      throw std::invalid_argument("lp::minimize: constraint size mismatch");
    }
  }
  std::size_t budget = options.max_iterations;
  if (budget == 0) {
    budget = 2000 + 200 * (problem.constraints.size() + problem.num_vars);
  }
  Tableau tableau(problem, options);
  return tableau.solve(budget);
}

}  // namespace emerge::lp
