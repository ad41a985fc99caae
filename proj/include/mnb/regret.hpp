#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "mnb/error.hpp"

namespace mnb {

/// argmax_i mu_i * c_{i,t}; the lowest index wins ties.
inline int oracle_node(std::span<const double> mu, std::span<const double> costs_t) {
  if (mu.size() != costs_t.size() || mu.empty())
    fail(ErrorKind::invalid_argument, "oracle_node: vectors must be nonempty and of equal length");
  int best = 0;
  double best_value = mu[0] * costs_t[0];
  for (std::size_t i = 1; i < mu.size(); ++i) {
    const double v = mu[i] * costs_t[i];
    if (v > best_value) {
      best_value = v;
      best = static_cast<int>(i);
    }
  }
  return best;
}

/// One policy run against fixed (lambda, costs).
struct TrialRecord {
  std::vector<int> chosen;             // i_t
  std::vector<double> mean_reward;     // mu_{i_t} c_{i_t,t}
  std::vector<double> oracle_reward;   // mu_{i*_t} c_{i*_t,t}

  /// Cumulative regret R(t) for t = 1..T.
  std::vector<double> regret_path() const {
    std::vector<double> path(mean_reward.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < path.size(); ++t) {
      acc += oracle_reward[t] - mean_reward[t];
      path[t] = acc;
    }
    return path;
  }
};

inline double trial_regret(const TrialRecord& trial) {
  if (trial.mean_reward.size() != trial.oracle_reward.size())
    fail(ErrorKind::invalid_argument, "trial_regret: incomplete trial record");
  double total = 0.0;
  for (std::size_t t = 0; t < trial.mean_reward.size(); ++t) total += trial.oracle_reward[t] - trial.mean_reward[t];
  return total;
}

/// (8 + 2 sqrt 2) (m V_T ln N)^{1/3} T^{2/3}.
inline double hedge_bound(int m, double variation, int n_nodes, double horizon) {
  if (variation < 0.0 || n_nodes < 2 || horizon < 1.0 || m < 1)
    fail(ErrorKind::invalid_argument, "hedge_bound: need V_T >= 0, N >= 2, T >= 1, m >= 1");
  return (8.0 + 2.0 * std::numbers::sqrt2) * std::cbrt(m * variation * std::log(static_cast<double>(n_nodes))) *
         std::pow(horizon, 2.0 / 3.0);
}

/// 2 sqrt 2 sqrt(Delta ln N), the within-batch Hedge guarantee against the
/// batch's best single node. N is real-valued so the bound can be probed at
/// non-integer node counts.
inline double per_batch_bound(double batch_size, double n_nodes) {
  if (batch_size < 1.0 || n_nodes <= 1.0) fail(ErrorKind::invalid_argument, "per_batch_bound: need Delta >= 1, N > 1");
  return 2.0 * std::numbers::sqrt2 * std::sqrt(batch_size * std::log(n_nodes));
}

/// (m V_T N ln N)^{1/3} T^{2/3}: order-of-growth reference for R.EXP3 with
/// unit constant. Not a guarantee.
inline double rexp3_bound_reference(int m, double variation, int n_nodes, double horizon) {
  if (variation < 0.0 || n_nodes < 2 || horizon < 1.0 || m < 1)
    fail(ErrorKind::invalid_argument, "rexp3_bound_reference: need V_T >= 0, N >= 2, T >= 1, m >= 1");
  const double n = n_nodes;
  return std::cbrt(m * variation * n * std::log(n)) * std::pow(horizon, 2.0 / 3.0);
}

}  // namespace mnb
