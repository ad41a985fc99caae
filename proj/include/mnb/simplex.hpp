#pragma once

// Dense two-phase tableau simplex for small LPs
//
//   minimize    c'x
//   subject to  A_eq x  = b_eq
//               A_ub x <= b_ub
//               lower <= x <= upper      (bounds may be infinite)
//
// Pricing is Dantzig's rule; after a run of degenerate pivots the solver
// switches to Bland's rule, which cannot cycle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mnb/error.hpp"

namespace mnb::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Row {
  std::vector<double> coeffs;  // dense, one entry per variable
  double rhs = 0.0;
};

struct LinearProgram {
  std::vector<double> cost;
  std::vector<Row> equalities;
  std::vector<Row> inequalities;  // coeffs . x <= rhs
  std::vector<double> lower;
  std::vector<double> upper;

  int n_vars() const noexcept { return static_cast<int>(cost.size()); }

  /// Appends a variable with bounds and cost; existing rows get a zero column.
  int add_variable(double c, double lo, double hi) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    for (auto& r : equalities) r.coeffs.push_back(0.0);
    for (auto& r : inequalities) r.coeffs.push_back(0.0);
    return n_vars() - 1;
  }

  Row& add_equality(double rhs) {
    equalities.push_back(Row{std::vector<double>(cost.size(), 0.0), rhs});
    return equalities.back();
  }

  Row& add_inequality(double rhs) {
    inequalities.push_back(Row{std::vector<double>(cost.size(), 0.0), rhs});
    return inequalities.back();
  }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration-limit";
  }
  return "?";
}

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-11;
  int max_iterations = 100000;
  int degenerate_switch = 50;  // consecutive degenerate pivots before Bland's rule
};

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

namespace detail {

// Column mapping from an original variable to standard-form columns:
// x = offset + sign * col_a  (- col_b when the variable is free).
struct VarMap {
  double offset = 0.0;
  double sign = 1.0;
  int col_a = -1;
  int col_b = -1;
};

class Tableau {
 public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0) {}

  double& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
  double operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
  double& rhs(int r) { return (*this)(r, cols_); }
  // Row `rows_` is the objective row (reduced costs, negated objective in rhs).
  double& obj(int c) { return (*this)(rows_, c); }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / (*this)(pr, pc);
    double* prow = &(*this)(pr, 0);
    for (int c = 0; c <= cols_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      double* row = &(*this)(r, 0);
      const double f = row[pc];
      if (f == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> a_;
};

// Minimizes the objective row over columns with allowed[c] true.
inline Status run_simplex(Tableau& t, std::vector<int>& basis, const std::vector<char>& allowed,
                          const std::vector<char>& active_row, const Options& opt, int& iterations) {
  int degenerate_run = 0;
  while (true) {
    if (iterations >= opt.max_iterations) return Status::iteration_limit;
    const bool bland = degenerate_run >= opt.degenerate_switch;
    int enter = -1;
    double best = -opt.optimality_tol;
    for (int c = 0; c < t.cols(); ++c) {
      if (!allowed[c]) continue;
      const double d = t.obj(c);
      if (d < best) {
        enter = c;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) return Status::optimal;

    int leave = -1;
    double best_ratio = kInf;
    for (int r = 0; r < t.rows(); ++r) {
      if (!active_row[r]) continue;
      const double a = t(r, enter);
      if (a <= opt.pivot_tol) continue;
      const double ratio = std::max(0.0, t.rhs(r)) / a;
      if (leave < 0 || ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        leave = r;
      } else if (ratio <= best_ratio + 1e-12 && basis[r] < basis[leave]) {
        leave = r;
      }
    }
    if (leave < 0) return Status::unbounded;
    degenerate_run = best_ratio <= opt.feasibility_tol ? degenerate_run + 1 : 0;
    t.pivot(leave, enter);
    basis[leave] = enter;
    ++iterations;
  }
}

}  // namespace detail

inline Solution solve(const LinearProgram& lp, const Options& opt = {}) {
  const int n = lp.n_vars();
  if (static_cast<int>(lp.lower.size()) != n || static_cast<int>(lp.upper.size()) != n)
    fail(ErrorKind::invalid_argument, "LP bounds length mismatch");
  for (const auto& r : lp.equalities)
    if (static_cast<int>(r.coeffs.size()) != n) fail(ErrorKind::invalid_argument, "LP equality row length mismatch");
  for (const auto& r : lp.inequalities)
    if (static_cast<int>(r.coeffs.size()) != n) fail(ErrorKind::invalid_argument, "LP inequality row length mismatch");

  // Standard-form columns for the structural variables.
  std::vector<detail::VarMap> map(n);
  int n_struct = 0;
  std::vector<std::pair<int, double>> bound_rows;  // (column, upper bound on that column)
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower[j], hi = lp.upper[j];
    if (lo > hi) return Solution{Status::infeasible, {}, 0.0, 0};
    auto& v = map[j];
    if (std::isfinite(lo)) {
      v.offset = lo;
      v.col_a = n_struct++;
      if (std::isfinite(hi)) bound_rows.emplace_back(v.col_a, hi - lo);
    } else if (std::isfinite(hi)) {
      v.offset = hi;
      v.sign = -1.0;
      v.col_a = n_struct++;
    } else {
      v.col_a = n_struct++;
      v.col_b = n_struct++;
    }
  }

  const int n_eq = static_cast<int>(lp.equalities.size());
  const int n_ub = static_cast<int>(lp.inequalities.size()) + static_cast<int>(bound_rows.size());
  const int m = n_eq + n_ub;
  const int n_slack = n_ub;
  const int n_art = m;  // at most one artificial per row; unused ones stay disallowed
  const int slack0 = n_struct, art0 = n_struct + n_slack;
  const int cols = n_struct + n_slack + n_art;

  detail::Tableau t(m, cols);
  auto put_row = [&](int r, const Row& row) {
    double rhs = row.rhs;
    for (int j = 0; j < n; ++j) {
      const double a = row.coeffs[j];
      if (a == 0.0) continue;
      const auto& v = map[j];
      rhs -= a * v.offset;
      t(r, v.col_a) += a * v.sign;
      if (v.col_b >= 0) t(r, v.col_b) -= a;
    }
    t.rhs(r) = rhs;
  };
  for (int r = 0; r < n_eq; ++r) put_row(r, lp.equalities[r]);
  int r = n_eq;
  for (const auto& row : lp.inequalities) {
    put_row(r, row);
    t(r, slack0 + (r - n_eq)) = 1.0;
    ++r;
  }
  for (const auto& [col, ub] : bound_rows) {
    t(r, col) = 1.0;
    t.rhs(r) = ub;
    t(r, slack0 + (r - n_eq)) = 1.0;
    ++r;
  }

  std::vector<int> basis(m, -1);
  std::vector<char> is_art(cols, 0);
  for (int i = 0; i < m; ++i) {
    if (t.rhs(i) < 0.0)
      for (int c = 0; c <= cols; ++c) t(i, c) = -t(i, c);
    const bool slack_ok = i >= n_eq && t(i, slack0 + (i - n_eq)) > 0.0;
    if (slack_ok) {
      basis[i] = slack0 + (i - n_eq);
    } else {
      basis[i] = art0 + i;
      t(i, art0 + i) = 1.0;
      is_art[art0 + i] = 1;
    }
  }

  Solution sol;
  std::vector<char> active_row(m, 1);

  // Phase 1: minimize the sum of artificials.
  bool any_art = false;
  for (int i = 0; i < m; ++i) {
    if (!is_art[basis[i]]) continue;
    any_art = true;
    for (int c = 0; c <= cols; ++c)
      if (c == cols || !is_art[c]) t.obj(c) -= t(i, c);
  }
  if (any_art) {
    std::vector<char> allowed(cols, 1);
    for (int c = art0; c < cols; ++c) allowed[c] = is_art[c];
    const Status s1 = detail::run_simplex(t, basis, allowed, active_row, opt, sol.iterations);
    if (s1 == Status::iteration_limit) return Solution{s1, {}, 0.0, sol.iterations};
    if (-t.obj(cols) > opt.feasibility_tol * std::max(1.0, static_cast<double>(m)))
      return Solution{Status::infeasible, {}, 0.0, sol.iterations};
    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant and get deactivated.
    for (int i = 0; i < m; ++i) {
      if (!is_art[basis[i]]) continue;
      int pc = -1;
      for (int c = 0; c < art0; ++c)
        if (std::abs(t(i, c)) > 1e-9) { pc = c; break; }
      if (pc >= 0) {
        t.pivot(i, pc);
        basis[i] = pc;
      } else {
        active_row[i] = 0;
      }
    }
  }

  // Phase 2 objective row in standard-form columns.
  for (int c = 0; c <= cols; ++c) t.obj(c) = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto& v = map[j];
    t.obj(v.col_a) += lp.cost[j] * v.sign;
    if (v.col_b >= 0) t.obj(v.col_b) -= lp.cost[j];
  }
  for (int i = 0; i < m; ++i) {
    if (!active_row[i]) continue;
    const double f = t.obj(basis[i]);
    if (f == 0.0) continue;
    for (int c = 0; c <= cols; ++c) t.obj(c) -= f * t(i, c);
  }
  std::vector<char> allowed(cols, 1);
  for (int c = art0; c < cols; ++c) allowed[c] = 0;
  const Status s2 = detail::run_simplex(t, basis, allowed, active_row, opt, sol.iterations);
  if (s2 != Status::optimal) {
    sol.status = s2;
    return sol;
  }

  std::vector<double> col_value(cols, 0.0);
  for (int i = 0; i < m; ++i)
    if (active_row[i]) col_value[basis[i]] = std::max(0.0, t.rhs(i));
  sol.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const auto& v = map[j];
    double x = v.offset + v.sign * col_value[v.col_a];
    if (v.col_b >= 0) x -= col_value[v.col_b];
    sol.x[j] = x;
  }
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += lp.cost[j] * sol.x[j];
  sol.status = Status::optimal;
  return sol;
}

}  // namespace mnb::lp
