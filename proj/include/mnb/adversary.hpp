#pragma once

// Adversarial cost sequences c_{i,t} in [0, 1/m] and their cumulative
// max-variation V_T.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mnb/error.hpp"
#include "mnb/random.hpp"

namespace mnb {

/// Costs indexed by (node, time), stored time-major so one step is a span.
class CostMatrix {
 public:
  CostMatrix(int n_nodes, long horizon, int m)
      : n_(n_nodes), horizon_(horizon), m_(m), data_(static_cast<std::size_t>(n_nodes) * horizon, 0.0) {
    if (n_nodes < 1) fail(ErrorKind::invalid_argument, "cost matrix needs at least one node");
    if (horizon < 1) fail(ErrorKind::invalid_argument, "cost matrix needs at least one step");
    if (m < 1) fail(ErrorKind::invalid_argument, "m must be >= 1");
  }

  int n_nodes() const noexcept { return n_; }
  long horizon() const noexcept { return horizon_; }
  int m() const noexcept { return m_; }
  double cap() const noexcept { return 1.0 / m_; }

  // 0-based node and step.
  double& at(int node, long t) { return data_[index(node, t)]; }
  double at(int node, long t) const { return data_[index(node, t)]; }

  std::span<const double> step(long t) const {
    return {data_.data() + static_cast<std::size_t>(t) * n_, static_cast<std::size_t>(n_)};
  }
  std::span<double> step(long t) {
    return {data_.data() + static_cast<std::size_t>(t) * n_, static_cast<std::size_t>(n_)};
  }

  /// Per-step variation cap the generator promised, if any.
  std::optional<double> declared_step_bound;

  const std::vector<double>& values() const noexcept { return data_; }

 private:
  std::size_t index(int node, long t) const {
    return static_cast<std::size_t>(t) * n_ + static_cast<std::size_t>(node);
  }

  int n_;
  long horizon_;
  int m_;
  std::vector<double> data_;
};

/// Random-walk costs: c_{i,1} ~ U(0, 1/m), then c_{i,t} uniform on
/// (c_{i,t-1} - s, c_{i,t-1} + s) intersected with (0, 1/m).
template <class URBG>
CostMatrix generate_costs(int n_nodes, long horizon, int m, double step_scale, URBG& rng) {
  if (m < 1) fail(ErrorKind::invalid_argument, "m must be >= 1");
  const double cap = 1.0 / m;
  if (!(step_scale > 0.0) || step_scale > cap)
    fail(ErrorKind::invalid_argument, "step scale must lie in (0, 1/m]");
  CostMatrix costs(n_nodes, horizon, m);
  costs.declared_step_bound = step_scale;
  for (int i = 0; i < n_nodes; ++i) costs.at(i, 0) = cap * uniform01(rng);
  for (long t = 1; t < horizon; ++t) {
    for (int i = 0; i < n_nodes; ++i) {
      const double prev = costs.at(i, t - 1);
      const double lo = std::max(0.0, prev - step_scale);
      const double hi = std::min(cap, prev + step_scale);
      costs.at(i, t) = lo + (hi - lo) * uniform01(rng);
    }
  }
  return costs;
}

/// Cumulative max-variation path. v[t-1] holds V_t, with V_1 = 0.
struct VariationBudget {
  std::vector<double> v;
  double step_bound = 0.0;  // largest single-step max-variation observed
  std::optional<long> t0;   // first T with V_T >= 1/m

  double total() const { return v.empty() ? 0.0 : v.back(); }
};

/// max_i |c_{i,t+1} - c_{i,t}| for the transition t -> t+1 (0-based t).
inline double step_variation(const CostMatrix& costs, long t) {
  double worst = 0.0;
  for (int i = 0; i < costs.n_nodes(); ++i)
    worst = std::max(worst, std::abs(costs.at(i, t + 1) - costs.at(i, t)));
  return worst;
}

inline VariationBudget compute_variation(const CostMatrix& costs) {
  const long horizon = costs.horizon();
  if (horizon < 2) fail(ErrorKind::invalid_argument, "variation needs at least two steps");
  VariationBudget out;
  out.v.assign(static_cast<std::size_t>(horizon), 0.0);
  const double threshold = costs.cap();
  double acc = 0.0;
  for (long t = 0; t + 1 < horizon; ++t) {
    const double d = step_variation(costs, t);
    out.step_bound = std::max(out.step_bound, d);
    acc += d;
    out.v[static_cast<std::size_t>(t + 1)] = acc;
    if (!out.t0 && acc >= threshold) out.t0 = t + 2;
  }
  return out;
}

/// Assumption check: V_T <= T/m must hold everywhere; 1/m <= V_T from t0 on.
inline void validate_assumption(const VariationBudget& budget, int m) {
  for (std::size_t k = 0; k < budget.v.size(); ++k) {
    const double t = static_cast<double>(k + 1);
    if (budget.v[k] > t / m * (1.0 + 1e-12))
      fail(ErrorKind::validation, "variation V_T exceeds T/m at T=" + std::to_string(k + 1));
  }
}

/// Membership in C_T: all entries in [0, 1/m] and V_T within the budget.
inline bool membership_check(const CostMatrix& costs, double budget) {
  const double cap = costs.cap();
  for (double c : costs.values())
    if (!(c >= 0.0 && c <= cap)) return false;
  return compute_variation(costs).total() <= budget;
}

/// Max-variation attributed to each batch of length `batch_size`: batch b owns
/// the transitions leaving its own steps, so the parts sum to V_T.
inline std::vector<double> batch_variation(const CostMatrix& costs, long batch_size) {
  if (batch_size < 1) fail(ErrorKind::invalid_argument, "batch size must be >= 1");
  const long horizon = costs.horizon();
  std::vector<double> parts(static_cast<std::size_t>((horizon + batch_size - 1) / batch_size), 0.0);
  for (long t = 0; t + 1 < horizon; ++t) parts[static_cast<std::size_t>(t / batch_size)] += step_variation(costs, t);
  return parts;
}

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// CSV: header t,node_1,...,node_N then one row per step, 17 significant digits.
inline void write_costs_csv(std::ostream& os, const CostMatrix& costs) {
  os << "t";
  for (int i = 0; i < costs.n_nodes(); ++i) os << ",node_" << (i + 1);
  os << '\n';
  for (long t = 0; t < costs.horizon(); ++t) {
    os << (t + 1);
    for (int i = 0; i < costs.n_nodes(); ++i) os << ',' << detail::format_double(costs.at(i, t));
    os << '\n';
  }
}

inline CostMatrix read_costs_csv(std::istream& is, int m) {
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::parse, "cost CSV: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") fail(ErrorKind::parse, "cost CSV line 1: expected header 't,node_1,...'");
  const int n = static_cast<int>(header.size()) - 1;
  for (int i = 0; i < n; ++i)
    if (header[i + 1] != "node_" + std::to_string(i + 1))
      fail(ErrorKind::parse, "cost CSV line 1: expected column 'node_" + std::to_string(i + 1) + "'");

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double x = std::stod(cell, &used);
        if (cell.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument(cell);
        if (col > 0) row.push_back(x);
        else if (static_cast<long>(x) != static_cast<long>(rows.size()) + 1)
          fail(ErrorKind::parse, "cost CSV line " + std::to_string(line_no) + ": steps must be consecutive from 1");
      } catch (const std::logic_error&) {
        fail(ErrorKind::parse, "cost CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (static_cast<int>(row.size()) != n)
      fail(ErrorKind::parse, "cost CSV line " + std::to_string(line_no) + ": expected " + std::to_string(n + 1) + " fields");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::parse, "cost CSV: no data rows");
  CostMatrix costs(n, static_cast<long>(rows.size()), m);
  for (long t = 0; t < costs.horizon(); ++t)
    for (int i = 0; i < n; ++i) costs.at(i, t) = rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
  return costs;
}

}  // namespace mnb
