#pragma once

// DC optimal power flow per operating state, and the attack cost of a node as
// the change in optimal operation cost when that node is knocked out.
//
// Decision variables:
//   P_s          dispatch of each source (storage may be negative: charging)
//   shed_i       unserved load at each node
//   delta_i      voltage angle of every non-reference node
//   f+_e, f-_e   nonnegative split of the flow B_e (delta_from - delta_to)
//
//   min  sum_s (Cs_s - Ep) P_s + sum_e Cf_e (f+_e + f-_e) + (Cp + Ep) sum_i shed_i
//   s.t. sum_{s at i} P_s + shed_i + inflow_i - outflow_i = L_i
//        f+_e - f-_e = B_e (delta_from - delta_to)
//        0 <= f+_e, f-_e <= V A_e
//        0 <= P_s <= available_s,  |P_ess T_s| <= min{(1 - soc) C_ess, rated T_s}
//        0 <= shed_i <= L_i
//
// A knocked-out node loses every incident feeder, produces nothing and sheds
// its whole load. One reference angle is pinned per connected island.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mnb/adversary.hpp"
#include "mnb/error.hpp"
#include "mnb/grid.hpp"
#include "mnb/simplex.hpp"

namespace mnb::opf {

struct Layout {
  std::vector<int> dispatch;  // per source
  std::vector<int> shed;      // per node
  std::vector<int> angle;     // per node, -1 for island references
  std::vector<int> flow_pos;  // per feeder, -1 when disconnected
  std::vector<int> flow_neg;
  std::vector<int> reference_nodes;
};

struct Problem {
  lp::LinearProgram lp;
  Layout layout;
  std::optional<int> outage;
};

struct Solution {
  std::vector<double> dispatch_kw;
  std::vector<double> shed_kw;
  std::vector<double> angle_rad;
  std::vector<double> flow_kw;  // B (delta_from - delta_to); 0 on disconnected feeders
  std::vector<double> flow_pos;
  std::vector<double> flow_neg;
  double objective = 0.0;
  int iterations = 0;
};

/// Symmetric storage power limit min{(1 - soc) C_ess, rated T_s} / T_s.
inline double storage_limit_kw(const grid::GridModel& g, const grid::Source& src, double soc) {
  return std::min((1.0 - soc) * g.ess_capacity_kwh, src.rated_kw * g.step_hours) / g.step_hours;
}

inline Problem build_lp(const grid::GridModel& g, const grid::GridState& state, std::optional<int> outage = {}) {
  const int n = g.n_nodes();
  if (static_cast<int>(state.load_kw.size()) != n || static_cast<int>(state.ess_soc.size()) != n ||
      state.available_kw.size() != g.sources.size())
    fail(ErrorKind::invalid_argument, "build_lp: grid state dimensions do not match the grid");
  if (outage && (*outage < 0 || *outage >= n))
    fail(ErrorKind::invalid_argument, "build_lp: outage node out of range");

  Problem p;
  p.outage = outage;
  auto& lp = p.lp;
  auto& lay = p.layout;
  const bool has_outage = outage.has_value();
  const int out = has_outage ? *outage : -1;

  std::vector<char> alive(g.feeders.size(), 1);
  if (has_outage)
    for (std::size_t e = 0; e < g.feeders.size(); ++e)
      if (g.feeders[e].from == out || g.feeders[e].to == out) alive[e] = 0;
  const auto comp = grid::components(n, g.feeders, alive);

  for (std::size_t s = 0; s < g.sources.size(); ++s) {
    const auto& src = g.sources[s];
    double lo = 0.0, hi = state.available_kw[s];
    if (src.type == grid::SourceType::ess) {
      hi = storage_limit_kw(g, src, state.ess_soc[src.node]);
      lo = -hi;
    }
    if (src.node == out) lo = hi = 0.0;
    lay.dispatch.push_back(lp.add_variable(src.variable_cost - state.price, lo, hi));
  }
  for (int i = 0; i < n; ++i) {
    const double load = state.load_kw[i];
    const double lo = i == out ? load : 0.0;
    lay.shed.push_back(lp.add_variable(g.penalty_cost + state.price, lo, load));
  }
  lay.angle.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (comp[i] == i) {  // lowest index of its island
      lay.reference_nodes.push_back(i);
      continue;
    }
    lay.angle[i] = lp.add_variable(0.0, -lp::kInf, lp::kInf);
  }
  lay.flow_pos.assign(g.feeders.size(), -1);
  lay.flow_neg.assign(g.feeders.size(), -1);
  for (std::size_t e = 0; e < g.feeders.size(); ++e) {
    if (!alive[e]) continue;
    const auto& f = g.feeders[e];
    const double cap = g.line_capacity(f);
    lay.flow_pos[e] = lp.add_variable(f.feeder_cost, 0.0, cap);
    lay.flow_neg[e] = lp.add_variable(f.feeder_cost, 0.0, cap);
  }

  // Nodal balance.
  for (int i = 0; i < n; ++i) {
    auto& row = lp.add_equality(state.load_kw[i]);
    row.coeffs[lay.shed[i]] = 1.0;
    for (std::size_t s = 0; s < g.sources.size(); ++s)
      if (g.sources[s].node == i) row.coeffs[lay.dispatch[s]] += 1.0;
    for (std::size_t e = 0; e < g.feeders.size(); ++e) {
      if (!alive[e]) continue;
      const double sign = g.feeders[e].to == i ? 1.0 : g.feeders[e].from == i ? -1.0 : 0.0;
      if (sign == 0.0) continue;
      row.coeffs[lay.flow_pos[e]] += sign;
      row.coeffs[lay.flow_neg[e]] -= sign;
    }
  }
  // Flow definition through angles.
  for (std::size_t e = 0; e < g.feeders.size(); ++e) {
    if (!alive[e]) continue;
    const auto& f = g.feeders[e];
    auto& row = lp.add_equality(0.0);
    row.coeffs[lay.flow_pos[e]] = 1.0;
    row.coeffs[lay.flow_neg[e]] = -1.0;
    if (lay.angle[f.from] >= 0) row.coeffs[lay.angle[f.from]] -= f.susceptance;
    if (lay.angle[f.to] >= 0) row.coeffs[lay.angle[f.to]] += f.susceptance;
  }
  return p;
}

inline Solution solve_lp(const Problem& p, const grid::GridModel& g) {
  const auto res = lp::solve(p.lp);
  if (res.status == lp::Status::unbounded)
    fail(ErrorKind::validation, "OPF is unbounded; check source costs and bounds");
  if (res.status != lp::Status::optimal)
    fail(ErrorKind::numerical, std::string("OPF solve failed: ") + lp::to_string(res.status));
  const auto& lay = p.layout;
  Solution s;
  s.objective = res.objective;
  s.iterations = res.iterations;
  for (int v : lay.dispatch) s.dispatch_kw.push_back(res.x[v]);
  for (int v : lay.shed) s.shed_kw.push_back(res.x[v]);
  for (int v : lay.angle) s.angle_rad.push_back(v >= 0 ? res.x[v] : 0.0);
  for (std::size_t e = 0; e < g.feeders.size(); ++e) {
    const double fp = lay.flow_pos[e] >= 0 ? res.x[lay.flow_pos[e]] : 0.0;
    const double fn = lay.flow_neg[e] >= 0 ? res.x[lay.flow_neg[e]] : 0.0;
    s.flow_pos.push_back(fp);
    s.flow_neg.push_back(fn);
    s.flow_kw.push_back(fp - fn);
  }
  return s;
}

/// Largest |P + shed + inflow - outflow - L| over nodes.
inline double balance_residual(const grid::GridModel& g, const grid::GridState& state, const Solution& s) {
  std::vector<double> r(g.n_nodes(), 0.0);
  for (int i = 0; i < g.n_nodes(); ++i) r[i] = s.shed_kw[i] - state.load_kw[i];
  for (std::size_t k = 0; k < g.sources.size(); ++k) r[g.sources[k].node] += s.dispatch_kw[k];
  for (std::size_t e = 0; e < g.feeders.size(); ++e) {
    r[g.feeders[e].to] += s.flow_kw[e];
    r[g.feeders[e].from] -= s.flow_kw[e];
  }
  double worst = 0.0;
  for (double x : r) worst = std::max(worst, std::abs(x));
  return worst;
}

/// Optimal operation cost Co for a state, optionally with one node knocked out.
inline double operation_cost(const grid::GridModel& g, const grid::GridState& state, std::optional<int> outage = {}) {
  return solve_lp(build_lp(g, state, outage), g).objective;
}

/// c_{i,t} before normalization: |Co(intact) - Co(node i out)|.
inline double attack_cost(const grid::GridModel& g, const grid::GridState& state, int node) {
  return std::abs(operation_cost(g, state) - operation_cost(g, state, node));
}

struct CostSeries {
  CostMatrix costs;                  // normalized into [0, 1/m]
  std::vector<double> raw;           // time-major, before normalization
  double normalization = 1.0;        // raw = normalized * normalization
  std::vector<std::string> warnings;
};

/// Divides every entry by m * (global max). An all-zero matrix is left as is.
inline double normalize(CostMatrix& costs, std::vector<std::string>* warnings = nullptr) {
  double hi = 0.0;
  for (double c : costs.values()) hi = std::max(hi, c);
  if (hi <= 0.0) {
    if (warnings) warnings->push_back("all attack costs are zero; normalization constant set to 1");
    return 1.0;
  }
  // (c / hi) / m keeps the largest entry at exactly 1.0 / m after rounding.
  const double m = costs.m();
  for (long t = 0; t < costs.horizon(); ++t)
    for (int i = 0; i < costs.n_nodes(); ++i) costs.at(i, t) = costs.at(i, t) / hi / m;
  return m * hi;
}

/// Attack costs for every node and step, normalized into [0, 1/m]. Steps are
/// distributed over `threads` workers; results do not depend on the count.
inline CostSeries cost_timeseries(const grid::GridModel& g, const std::vector<grid::GridState>& states, int m,
                                  int threads = 1) {
  if (states.empty()) fail(ErrorKind::invalid_argument, "cost_timeseries: empty state sequence");
  const int n = g.n_nodes();
  const long horizon = static_cast<long>(states.size());
  CostMatrix costs(n, horizon, m);
  std::vector<std::string> errors(static_cast<std::size_t>(std::max(1, threads)));
  auto work = [&](int worker, int stride) {
    try {
      for (long t = worker; t < horizon; t += stride) {
        const auto& st = states[static_cast<std::size_t>(t)];
        const double intact = operation_cost(g, st);
        for (int i = 0; i < n; ++i) costs.at(i, t) = std::abs(intact - operation_cost(g, st, i));
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(worker)] = e.what();
    }
  };
  const int k = std::max(1, threads);
  if (k == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < k; ++w) pool.emplace_back(work, w, k);
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorKind::numerical, "cost_timeseries: " + e);

  CostSeries out{costs, costs.values(), 1.0, {}};
  out.normalization = normalize(out.costs, &out.warnings);
  return out;
}

}  // namespace mnb::opf
