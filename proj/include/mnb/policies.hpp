#pragma once

// Online-learning policies over grid nodes:
//   * Hedge(lambda): exponential weights on expected rewards mu_i * c_{i,t},
//     restarted every `batch_size` steps.
//   * Thompson-Hedge: Hedge driven by mean-attack values computed from rates
//     sampled out of per-node Gamma posteriors.
//   * R.EXP3: restarted EXP3 on the bandit reward K_{i,t} * c_{i,t}.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mnb/attack_model.hpp"
#include "mnb/error.hpp"
#include "mnb/random.hpp"

namespace mnb {

/// Which cost multiplies mu_i in the Hedge exponent. `own` uses each node's
/// revealed cost c_{i,t}; `chosen` uses c_{i_t,t} for every node.
enum class UpdateCost { own, chosen };

inline UpdateCost parse_update_cost(const std::string& s) {
  if (s == "own") return UpdateCost::own;
  if (s == "chosen") return UpdateCost::chosen;
  fail(ErrorKind::invalid_argument, "update_cost must be 'own' or 'chosen', got '" + s + "'");
}

inline const char* to_string(UpdateCost u) { return u == UpdateCost::own ? "own" : "chosen"; }

/// Learning base (1 - sqrt(ln N / 2T))^{-1}, computed once for the horizon.
inline double hedge_epsilon(int n_nodes, long horizon) {
  NodeSet nodes(n_nodes);
  const double ratio = nodes.log_size() / (2.0 * static_cast<double>(horizon));
  if (horizon < 1 || ratio >= 1.0)
    fail(ErrorKind::invalid_argument,
         "horizon too short: need T > ln(N)/2 (N=" + std::to_string(n_nodes) +
             ", T=" + std::to_string(horizon) + ")");
  return 1.0 / (1.0 - std::sqrt(ratio));
}

namespace detail {

inline long clamp_batch(double raw, long horizon) {
  if (!std::isfinite(raw) || raw > static_cast<double>(horizon)) return horizon;
  return std::clamp(static_cast<long>(std::ceil(raw)), 1L, horizon);
}

inline void check_batch_args(long horizon, int m, double variation, int n_nodes) {
  if (!(variation > 0.0)) fail(ErrorKind::invalid_argument, "variation budget V_T must be > 0");
  if (m < 1) fail(ErrorKind::invalid_argument, "m must be >= 1");
  if (horizon < 1) fail(ErrorKind::invalid_argument, "horizon must be >= 1");
  NodeSet{n_nodes};
}

}  // namespace detail

/// ceil((ln N)^{1/3} (T / (m V_T))^{2/3}), clamped to [1, T].
inline long hedge_batch_size(long horizon, int m, double variation, int n_nodes) {
  detail::check_batch_args(horizon, m, variation, n_nodes);
  const double ln_n = std::log(static_cast<double>(n_nodes));
  const double ratio = static_cast<double>(horizon) / (m * variation);
  return detail::clamp_batch(std::cbrt(ln_n) * std::pow(ratio, 2.0 / 3.0), horizon);
}

/// Restart length for R.EXP3: ceil((N ln N)^{1/3} (T / (m V_T))^{2/3}), clamped to [1, T].
inline long rexp3_batch_size(long horizon, int m, double variation, int n_nodes) {
  detail::check_batch_args(horizon, m, variation, n_nodes);
  const double n = n_nodes;
  const double ratio = static_cast<double>(horizon) / (m * variation);
  return detail::clamp_batch(std::cbrt(n * std::log(n)) * std::pow(ratio, 2.0 / 3.0), horizon);
}

/// Exploration rate min{1, sqrt(N ln N / ((e - 1) batch))}.
inline double rexp3_gamma(int n_nodes, long batch_size) {
  const double n = n_nodes;
  return std::min(1.0, std::sqrt(n * std::log(n) / ((std::numbers::e - 1.0) * batch_size)));
}

namespace detail {

// Keeps exponential weights finite over very long batches. The selection
// distribution is invariant under common scaling.
inline void rescale_if_large(std::vector<double>& w) {
  const double hi = *std::max_element(w.begin(), w.end());
  if (hi > 1e150)
    for (double& x : w) x /= hi;
}

template <class URBG>
int sample_index(std::span<const double> weights, double total, URBG& rng) {
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // u landed in the rounding gap at the top; return the last positive weight.
  for (int i = n - 1; i >= 0; --i)
    if (weights[i] > 0.0) return i;
  return n - 1;
}

}  // namespace detail

/// Exponential-weights state with batch restarts.
struct PolicyState {
  std::vector<double> weights;
  double epsilon = 1.0;
  long batch_size = 1;
  long step_in_batch = 0;  // in [0, batch_size)
  long time = 1;           // step about to be played

  int n_nodes() const noexcept { return static_cast<int>(weights.size()); }
};

inline PolicyState make_hedge_state(int n_nodes, double epsilon, long batch_size) {
  NodeSet{n_nodes};
  if (!(epsilon > 1.0)) fail(ErrorKind::invalid_argument, "learning base epsilon must be > 1");
  if (batch_size < 1) fail(ErrorKind::invalid_argument, "batch size must be >= 1");
  return PolicyState{std::vector<double>(n_nodes, 1.0), epsilon, batch_size, 0, 1};
}

/// p_i = w_i / sum_j w_j.
inline std::vector<double> selection_distribution(const PolicyState& state) {
  double total = 0.0;
  for (double w : state.weights) total += w;
  std::vector<double> p(state.weights.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = state.weights[i] / total;
  return p;
}

template <class URBG>
int select_node(const PolicyState& state, URBG& rng) {
  double total = 0.0;
  for (double w : state.weights) total += w;
  return detail::sample_index(state.weights, total, rng);
}

/// One Hedge step: w_i <- w_i * eps^{mu_i * c}, where c is c_{i,t} (own) or
/// c_{chosen,t} (chosen). Advances the batch clock and restarts all weights at
/// 1 once the batch is complete.
inline PolicyState hedge_update(PolicyState state, std::span<const double> mu,
                                std::span<const double> costs, int m,
                                UpdateCost mode = UpdateCost::own, int chosen = -1) {
  const int n = state.n_nodes();
  if (static_cast<int>(mu.size()) != n || static_cast<int>(costs.size()) != n)
    fail(ErrorKind::invalid_argument, "hedge_update: mu/costs length must equal the node count");
  const double cap = 1.0 / m;
  const double slack = 1e-12 * cap;
  for (int i = 0; i < n; ++i) {
    if (!(costs[i] >= 0.0 && costs[i] <= cap + slack))
      fail(ErrorKind::invalid_argument, "hedge_update: cost outside [0, 1/m] at node " + std::to_string(i + 1));
    if (!(mu[i] >= 0.0 && mu[i] <= m))
      fail(ErrorKind::invalid_argument, "hedge_update: mean attacks outside [0, m] at node " + std::to_string(i + 1));
  }
  if (mode == UpdateCost::chosen && (chosen < 0 || chosen >= n))
    fail(ErrorKind::invalid_argument, "hedge_update: 'chosen' mode needs the probed node");

  const double log_eps = std::log(state.epsilon);
  for (int i = 0; i < n; ++i) {
    const double c = mode == UpdateCost::own ? costs[i] : costs[chosen];
    state.weights[i] *= std::exp(log_eps * mu[i] * c);
  }
  detail::rescale_if_large(state.weights);

  ++state.time;
  if (++state.step_in_batch == state.batch_size) {
    state.step_in_batch = 0;
    std::fill(state.weights.begin(), state.weights.end(), 1.0);
  }
  return state;
}

/// What one step revealed to the operator.
struct StepOutcome {
  int chosen_node = 0;
  int observed_count = 0;
  double reward = 0.0;                  // observed_count * revealed_costs[chosen_node]
  std::span<const double> revealed_costs;
};

struct ThompsonHedgeState {
  PolicyState base;
  std::vector<GammaBelief> beliefs;
  int m = 1;
  std::vector<double> sampled_mu;  // mu-hat used by the latest update
};

inline ThompsonHedgeState make_thompson_hedge_state(std::vector<GammaBelief> prior, int m,
                                                    double epsilon, long batch_size) {
  const int n = static_cast<int>(prior.size());
  ThompsonHedgeState s{make_hedge_state(n, epsilon, batch_size), std::move(prior), m,
                       std::vector<double>(n, 0.0)};
  if (m < 1) fail(ErrorKind::invalid_argument, "m must be >= 1");
  return s;
}

/// Posterior update of the probed node, then a fresh rate sample for every
/// node, mu-hat from each sample, and a Hedge step with mu-hat.
template <class URBG>
ThompsonHedgeState thompson_hedge_update(ThompsonHedgeState state, const StepOutcome& outcome,
                                         URBG& rng, UpdateCost mode = UpdateCost::own) {
  const int n = state.base.n_nodes();
  if (outcome.chosen_node < 0 || outcome.chosen_node >= n)
    fail(ErrorKind::invalid_argument, "thompson_hedge_update: chosen node out of range");
  auto& probed = state.beliefs[outcome.chosen_node];
  probed = update_belief(probed, outcome.observed_count, state.m);
  for (int i = 0; i < n; ++i)
    state.sampled_mu[i] = mean_attacks(sample_rate(state.beliefs[i], rng), state.m);
  state.base = hedge_update(std::move(state.base), state.sampled_mu, outcome.revealed_costs,
                            state.m, mode, outcome.chosen_node);
  return state;
}

/// Restarted EXP3 with exploration mixing.
struct REXP3State {
  std::vector<double> weights;
  double gamma = 1.0;
  long batch_size = 1;
  long step_in_batch = 0;
  int pending_node = -1;  // node chosen at the previous step, awaiting its reward
  double pending_prob = 0.0;

  int n_nodes() const noexcept { return static_cast<int>(weights.size()); }
};

inline REXP3State make_rexp3_state(int n_nodes, double gamma, long batch_size) {
  NodeSet{n_nodes};
  if (!(gamma > 0.0 && gamma <= 1.0)) fail(ErrorKind::invalid_argument, "EXP3 gamma must be in (0, 1]");
  if (batch_size < 1) fail(ErrorKind::invalid_argument, "batch size must be >= 1");
  return REXP3State{std::vector<double>(n_nodes, 1.0), gamma, batch_size, 0, -1, 0.0};
}

/// p_i = (1 - gamma) w_i / sum w + gamma / N.
inline std::vector<double> rexp3_distribution(const REXP3State& state) {
  const int n = state.n_nodes();
  double total = 0.0;
  for (double w : state.weights) total += w;
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = (1.0 - state.gamma) * state.weights[i] / total + state.gamma / n;
  return p;
}

/// Credits `bandit_reward` to the previously chosen node (if any) through the
/// importance-weighted estimate reward / p, restarts at batch boundaries, then
/// draws the next node.
template <class URBG>
std::pair<int, REXP3State> rexp3_step(REXP3State state, double bandit_reward, URBG& rng) {
  if (!(bandit_reward >= 0.0 && bandit_reward <= 1.0))
    fail(ErrorKind::invalid_argument, "R.EXP3 reward must lie in [0, 1]");
  const int n = state.n_nodes();
  if (state.pending_node >= 0) {
    const double estimate = bandit_reward / state.pending_prob;
    state.weights[state.pending_node] *= std::exp(state.gamma * estimate / n);
    detail::rescale_if_large(state.weights);
    if (++state.step_in_batch == state.batch_size) {
      state.step_in_batch = 0;
      std::fill(state.weights.begin(), state.weights.end(), 1.0);
    }
  }
  const std::vector<double> p = rexp3_distribution(state);
  const int next = detail::sample_index(p, 1.0, rng);
  state.pending_node = next;
  state.pending_prob = p[next];
  return {next, std::move(state)};
}

}  // namespace mnb
