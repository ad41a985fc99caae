#pragma once

// Monte-Carlo estimate of the Bayesian sup regret.
//
//   for q in 1..Q:   lambda_i ~ Gamma(alpha_i, beta_i)
//     for l in 1..L: fresh attack counts and a fresh cost sequence; every
//                    policy in the roster runs on the same streams
//     R~_q(t) = max_l R_l(t)
//   R^(t) = mean_q R~_q(t), with the standard error across q.
//
// The max over L sampled cost sequences stands in for the sup over C_T, so
// the estimate is an empirical lower bound on the true sup.
//
// Every (q, l, purpose) pair owns an RNG stream derived from the master seed,
// and outer trials are reduced in index order, so results are bit-identical
// for any thread count and any roster composition.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mnb/adversary.hpp"
#include "mnb/attack_model.hpp"
#include "mnb/error.hpp"
#include "mnb/policies.hpp"
#include "mnb/random.hpp"
#include "mnb/regret.hpp"

namespace mnb {

enum class PolicyKind { thompson_hedge = 0, hedge = 1, rexp3 = 2 };

inline const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::thompson_hedge: return "thompson_hedge";
    case PolicyKind::hedge: return "hedge";
    case PolicyKind::rexp3: return "rexp3";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& s) {
  for (auto p : {PolicyKind::thompson_hedge, PolicyKind::hedge, PolicyKind::rexp3})
    if (s == to_string(p)) return p;
  fail(ErrorKind::invalid_argument, "unknown policy '" + s + "' (expected thompson_hedge, hedge or rexp3)");
}

struct ExperimentConfig {
  int n_nodes = 10;
  long horizon = 2000;
  int m = 3;
  std::vector<GammaBelief> prior{GammaBelief(2.0, 2.0)};  // one entry (shared) or one per node
  double step_scale = 1.0 / 300.0;
  int outer_trials = 200;  // Q
  int inner_trials = 50;   // L
  std::vector<PolicyKind> roster{PolicyKind::thompson_hedge, PolicyKind::rexp3};
  std::uint64_t seed = 1;
  UpdateCost update_cost = UpdateCost::own;
  int threads = 1;
  double max_work = 1e12;  // cap on Q * L * T * N * |roster|

  const GammaBelief& prior_for(int node) const { return prior.size() == 1 ? prior[0] : prior[node]; }

  /// First T at which the generator's a-priori budget T * 2 * step_scale
  /// reaches 1/m.
  long generator_t0() const { return static_cast<long>(std::ceil(1.0 / (2.0 * m * step_scale) - 1e-9)); }

  double work() const {
    return static_cast<double>(outer_trials) * inner_trials * static_cast<double>(horizon) * n_nodes *
           static_cast<double>(roster.size());
  }

  void validate() const {
    if (n_nodes < 2) fail(ErrorKind::invalid_argument, "n_nodes must be >= 2");
    if (m < 1) fail(ErrorKind::invalid_argument, "m must be >= 1");
    if (outer_trials < 1 || inner_trials < 1) fail(ErrorKind::invalid_argument, "trial counts Q and L must be >= 1");
    if (!(step_scale > 0.0) || step_scale > 1.0 / m) fail(ErrorKind::invalid_argument, "step_scale must lie in (0, 1/m]");
    if (horizon < 2) fail(ErrorKind::invalid_argument, "horizon must be >= 2");
    if (horizon < generator_t0())
      fail(ErrorKind::invalid_argument, "horizon " + std::to_string(horizon) + " is below the generator threshold T0 = " +
                                            std::to_string(generator_t0()));
    hedge_epsilon(n_nodes, horizon);
    if (prior.size() != 1 && static_cast<int>(prior.size()) != n_nodes)
      fail(ErrorKind::invalid_argument, "prior must have 1 or n_nodes entries");
    if (roster.empty()) fail(ErrorKind::invalid_argument, "policy roster is empty");
    for (std::size_t a = 0; a < roster.size(); ++a)
      for (std::size_t b = a + 1; b < roster.size(); ++b)
        if (roster[a] == roster[b]) fail(ErrorKind::invalid_argument, "policy listed twice in roster");
    if (threads < 1) fail(ErrorKind::invalid_argument, "threads must be >= 1");
    if (work() > max_work)
      fail(ErrorKind::resource, "experiment needs " + std::to_string(work()) + " node-steps, above the budget " +
                                    std::to_string(max_work));
  }
};

struct PolicyCurve {
  PolicyKind policy = PolicyKind::thompson_hedge;
  std::vector<double> mean;    // R^(t)
  std::vector<double> stderr;  // standard error across outer trials
};

/// Hedge per-batch regret against the batch's best single node, aggregated
/// over all (q, l) cells by batch index. slack = 2 sqrt2 sqrt(Delta ln N) - regret.
struct BatchCheck {
  long batch = 0;  // 1-based
  long count = 0;
  double mean_regret = 0.0;
  double mean_slack = 0.0;
  double slack_stderr = 0.0;
  long cells_over_bound = 0;  // individual cells whose batch regret exceeded the bound
};

struct RegretSummary {
  ExperimentConfig config;
  std::vector<PolicyCurve> curves;
  std::vector<double> mean_variation;   // mean realized V_t over all cells
  std::vector<double> bound;            // hedge_bound(m, mean V_t, N, t)
  std::vector<double> rexp3_reference;  // order reference only
  double variation_mean = 0.0, variation_min = 0.0, variation_max = 0.0;
  long hedge_batch_min = 0, hedge_batch_max = 0;
  long rexp3_batch_min = 0, rexp3_batch_max = 0;
  std::optional<long> t0;  // first t with mean V_t >= 1/m
  std::vector<BatchCheck> hedge_batches;
  double seconds = 0.0;

  const PolicyCurve& curve(PolicyKind p) const {
    for (const auto& c : curves)
      if (c.policy == p) return c;
    fail(ErrorKind::invalid_argument, std::string("policy not in summary: ") + to_string(p));
  }
};

namespace detail {

enum : std::uint64_t { kLambdaStream = 1, kCostStream = 2, kCountStream = 3, kPolicyStream = 4 };

struct BatchAcc {
  long count = 0;
  double regret_sum = 0.0;
  double slack_sum = 0.0;
  double slack_sq = 0.0;
  long over = 0;
};

struct OuterResult {
  std::vector<std::vector<double>> sup_path;  // per roster entry
  std::vector<double> variation_sum;
  double vt_sum = 0.0, vt_min = std::numeric_limits<double>::infinity(), vt_max = 0.0;
  long hb_min = std::numeric_limits<long>::max(), hb_max = 0;
  long rb_min = std::numeric_limits<long>::max(), rb_max = 0;
  std::vector<BatchAcc> batches;
  std::string error;
};

struct Cell {
  const ExperimentConfig& cfg;
  std::uint64_t q, l;
  const std::vector<double>& mu;
  const std::vector<TruncatedPoissonModel>& models;
};

class CellRunner {
 public:
  CellRunner(const ExperimentConfig& cfg, double epsilon) : cfg_(cfg), epsilon_(epsilon) {}

  void run(std::uint64_t q, std::uint64_t l, const std::vector<double>& mu,
           const std::vector<TruncatedPoissonModel>& models, OuterResult& out) {
    const int n = cfg_.n_nodes;
    const long horizon = cfg_.horizon;
    const int m = cfg_.m;

    auto cost_rng = stream(cfg_.seed, {q, l, kCostStream});
    const CostMatrix costs = generate_costs(n, horizon, m, cfg_.step_scale, cost_rng);
    auto count_rng = stream(cfg_.seed, {q, l, kCountStream});
    counts_.resize(static_cast<std::size_t>(n) * horizon);
    for (long t = 0; t < horizon; ++t)
      for (int i = 0; i < n; ++i) counts_[static_cast<std::size_t>(t) * n + i] = sample_attacks(models[i], count_rng);

    const VariationBudget var = compute_variation(costs);
    double vt = var.total();
    if (!(vt > 0.0)) vt = static_cast<double>(horizon - 1) * cfg_.step_scale;
    if (out.variation_sum.empty()) out.variation_sum.assign(static_cast<std::size_t>(horizon), 0.0);
    for (long t = 0; t < horizon; ++t) out.variation_sum[t] += var.v[t];
    out.vt_sum += vt;
    out.vt_min = std::min(out.vt_min, vt);
    out.vt_max = std::max(out.vt_max, vt);

    const long hedge_batch = hedge_batch_size(horizon, m, vt, n);
    const long rexp3_batch = rexp3_batch_size(horizon, m, vt, n);
    out.hb_min = std::min(out.hb_min, hedge_batch);
    out.hb_max = std::max(out.hb_max, hedge_batch);
    out.rb_min = std::min(out.rb_min, rexp3_batch);
    out.rb_max = std::max(out.rb_max, rexp3_batch);

    oracle_.resize(static_cast<std::size_t>(horizon));
    for (long t = 0; t < horizon; ++t) {
      const auto c = costs.step(t);
      double best = 0.0;
      for (int i = 0; i < n; ++i) best = std::max(best, mu[i] * c[i]);
      oracle_[t] = best;
    }

    for (std::size_t k = 0; k < cfg_.roster.size(); ++k) {
      const PolicyKind kind = cfg_.roster[k];
      auto sel_rng = stream(cfg_.seed, {q, l, kPolicyStream, static_cast<std::uint64_t>(kind), 0});
      auto aux_rng = stream(cfg_.seed, {q, l, kPolicyStream, static_cast<std::uint64_t>(kind), 1});
      auto& sup = out.sup_path[k];
      double regret = 0.0;
      auto record = [&](long t, int chosen) {
        regret += oracle_[t] - mu[chosen] * costs.at(chosen, t);
        sup[t] = std::max(sup[t], regret);
      };
      switch (kind) {
        case PolicyKind::hedge: run_hedge(costs, mu, hedge_batch, sel_rng, record, out); break;
        case PolicyKind::thompson_hedge: run_thompson(costs, hedge_batch, sel_rng, aux_rng, record); break;
        case PolicyKind::rexp3: run_rexp3(costs, rexp3_batch, sel_rng, record); break;
      }
    }
  }

 private:
  int count(long t, int i) const { return counts_[static_cast<std::size_t>(t) * cfg_.n_nodes + i]; }

  template <class Record>
  void run_hedge(const CostMatrix& costs, const std::vector<double>& mu, long batch, Rng& rng, Record&& record,
                 OuterResult& out) {
    const int n = cfg_.n_nodes;
    PolicyState state = make_hedge_state(n, epsilon_, batch);
    node_sum_.assign(n, 0.0);
    double chosen_sum = 0.0;
    long batch_index = 0;
    const double bound = per_batch_bound(static_cast<double>(batch), n);
    for (long t = 0; t < cfg_.horizon; ++t) {
      const int i = select_node(state, rng);
      record(t, i);
      const auto c = costs.step(t);
      for (int j = 0; j < n; ++j) node_sum_[j] += mu[j] * c[j];
      chosen_sum += mu[i] * c[i];
      state = hedge_update(std::move(state), mu, c, cfg_.m, cfg_.update_cost, i);
      if (state.step_in_batch == 0 || t + 1 == cfg_.horizon) {
        const double best = *std::max_element(node_sum_.begin(), node_sum_.end());
        const double batch_regret = best - chosen_sum;
        if (out.batches.size() <= static_cast<std::size_t>(batch_index)) out.batches.resize(batch_index + 1);
        auto& acc = out.batches[batch_index];
        const double slack = bound - batch_regret;
        ++acc.count;
        acc.regret_sum += batch_regret;
        acc.slack_sum += slack;
        acc.slack_sq += slack * slack;
        if (slack < 0.0) ++acc.over;
        ++batch_index;
        std::fill(node_sum_.begin(), node_sum_.end(), 0.0);
        chosen_sum = 0.0;
      }
    }
  }

  template <class Record>
  void run_thompson(const CostMatrix& costs, long batch, Rng& sel_rng, Rng& aux_rng, Record&& record) {
    const int n = cfg_.n_nodes;
    std::vector<GammaBelief> beliefs;
    beliefs.reserve(n);
    for (int i = 0; i < n; ++i) beliefs.push_back(cfg_.prior_for(i));
    ThompsonHedgeState state = make_thompson_hedge_state(std::move(beliefs), cfg_.m, epsilon_, batch);
    for (long t = 0; t < cfg_.horizon; ++t) {
      const int i = select_node(state.base, sel_rng);
      record(t, i);
      const auto c = costs.step(t);
      const int k = count(t, i);
      const StepOutcome outcome{i, k, k * c[i], c};
      state = thompson_hedge_update(std::move(state), outcome, aux_rng, cfg_.update_cost);
    }
  }

  template <class Record>
  void run_rexp3(const CostMatrix& costs, long batch, Rng& rng, Record&& record) {
    REXP3State state = make_rexp3_state(cfg_.n_nodes, rexp3_gamma(cfg_.n_nodes, batch), batch);
    double reward = 0.0;
    for (long t = 0; t < cfg_.horizon; ++t) {
      auto [i, next] = rexp3_step(std::move(state), reward, rng);
      state = std::move(next);
      record(t, i);
      reward = std::min(1.0, count(t, i) * costs.at(i, t));
    }
  }

  const ExperimentConfig& cfg_;
  double epsilon_;
  std::vector<int> counts_;
  std::vector<double> oracle_;
  std::vector<double> node_sum_;
};

inline void run_outer(const ExperimentConfig& cfg, double epsilon, std::uint64_t q, OuterResult& out) {
  const int n = cfg.n_nodes;
  auto lambda_rng = stream(cfg.seed, {q, kLambdaStream});
  std::vector<double> mu(n);
  std::vector<TruncatedPoissonModel> models;
  models.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double lambda = sample_rate(cfg.prior_for(i), lambda_rng);
    models.emplace_back(lambda, cfg.m);
    mu[i] = mean_attacks(models.back());
  }
  out.sup_path.assign(cfg.roster.size(),
                      std::vector<double>(static_cast<std::size_t>(cfg.horizon), -std::numeric_limits<double>::infinity()));
  CellRunner runner(cfg, epsilon);
  for (int l = 0; l < cfg.inner_trials; ++l) runner.run(q, static_cast<std::uint64_t>(l), mu, models, out);
}

}  // namespace detail

inline RegretSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const double epsilon = hedge_epsilon(cfg.n_nodes, cfg.horizon);
  const int outer = cfg.outer_trials;
  std::vector<detail::OuterResult> results(static_cast<std::size_t>(outer));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int q = next++; q < outer; q = next++) {
      auto& slot = results[static_cast<std::size_t>(q)];
      try {
        detail::run_outer(cfg, epsilon, static_cast<std::uint64_t>(q), slot);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }
  };
  const int k = std::min(cfg.threads, outer);
  if (k <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < k; ++w) pool.emplace_back(worker);
  }
  for (const auto& r : results)
    if (!r.error.empty()) fail(ErrorKind::numerical, "experiment trial failed: " + r.error);

  const auto horizon = static_cast<std::size_t>(cfg.horizon);
  const double cells = static_cast<double>(outer) * cfg.inner_trials;
  RegretSummary s;
  s.config = cfg;
  s.mean_variation.assign(horizon, 0.0);
  s.variation_min = std::numeric_limits<double>::infinity();
  s.hedge_batch_min = s.rexp3_batch_min = std::numeric_limits<long>::max();
  for (const auto& r : results) {
    for (std::size_t t = 0; t < horizon; ++t) s.mean_variation[t] += r.variation_sum[t];
    s.variation_mean += r.vt_sum;
    s.variation_min = std::min(s.variation_min, r.vt_min);
    s.variation_max = std::max(s.variation_max, r.vt_max);
    s.hedge_batch_min = std::min(s.hedge_batch_min, r.hb_min);
    s.hedge_batch_max = std::max(s.hedge_batch_max, r.hb_max);
    s.rexp3_batch_min = std::min(s.rexp3_batch_min, r.rb_min);
    s.rexp3_batch_max = std::max(s.rexp3_batch_max, r.rb_max);
  }
  for (double& v : s.mean_variation) v /= cells;
  s.variation_mean /= cells;

  s.bound.assign(horizon, 0.0);
  s.rexp3_reference.assign(horizon, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double v = s.mean_variation[t];
    s.bound[t] = hedge_bound(cfg.m, v, cfg.n_nodes, static_cast<double>(t + 1));
    s.rexp3_reference[t] = rexp3_bound_reference(cfg.m, v, cfg.n_nodes, static_cast<double>(t + 1));
    if (!s.t0 && v >= 1.0 / cfg.m) s.t0 = static_cast<long>(t + 1);
  }

  for (std::size_t k2 = 0; k2 < cfg.roster.size(); ++k2) {
    PolicyCurve curve;
    curve.policy = cfg.roster[k2];
    curve.mean.assign(horizon, 0.0);
    curve.stderr.assign(horizon, 0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      double sum = 0.0;
      for (const auto& r : results) sum += r.sup_path[k2][t];
      const double mean = sum / outer;
      double ss = 0.0;
      for (const auto& r : results) {
        const double d = r.sup_path[k2][t] - mean;
        ss += d * d;
      }
      curve.mean[t] = mean;
      curve.stderr[t] = outer > 1 ? std::sqrt(ss / (outer - 1) / outer) : 0.0;
    }
    s.curves.push_back(std::move(curve));
  }

  std::vector<detail::BatchAcc> merged;
  for (const auto& r : results) {
    if (merged.size() < r.batches.size()) merged.resize(r.batches.size());
    for (std::size_t b = 0; b < r.batches.size(); ++b) {
      merged[b].count += r.batches[b].count;
      merged[b].regret_sum += r.batches[b].regret_sum;
      merged[b].slack_sum += r.batches[b].slack_sum;
      merged[b].slack_sq += r.batches[b].slack_sq;
      merged[b].over += r.batches[b].over;
    }
  }
  for (std::size_t b = 0; b < merged.size(); ++b) {
    const auto& a = merged[b];
    BatchCheck c;
    c.batch = static_cast<long>(b + 1);
    c.count = a.count;
    c.mean_regret = a.regret_sum / a.count;
    c.mean_slack = a.slack_sum / a.count;
    const double var = a.count > 1 ? std::max(0.0, (a.slack_sq - a.count * c.mean_slack * c.mean_slack) / (a.count - 1)) : 0.0;
    c.slack_stderr = std::sqrt(var / a.count);
    c.cells_over_bound = a.over;
    s.hedge_batches.push_back(c);
  }

  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return s;
}

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// t,policy,bayesian_sup_regret,stderr,bound
inline void write_summary_csv(std::ostream& os, const RegretSummary& s) {
  os << "t,policy,bayesian_sup_regret,stderr,bound\n";
  for (const auto& c : s.curves)
    for (std::size_t t = 0; t < c.mean.size(); ++t)
      os << (t + 1) << ',' << to_string(c.policy) << ',' << detail::fmt17(c.mean[t]) << ','
         << detail::fmt17(c.stderr[t]) << ',' << detail::fmt17(s.bound[t]) << '\n';
}

/// t,mean_variation,rexp3_order_reference
inline void write_reference_csv(std::ostream& os, const RegretSummary& s) {
  os << "t,mean_variation,rexp3_order_reference\n";
  for (std::size_t t = 0; t < s.bound.size(); ++t)
    os << (t + 1) << ',' << detail::fmt17(s.mean_variation[t]) << ',' << detail::fmt17(s.rexp3_reference[t]) << '\n';
}

/// batch,count,mean_regret,mean_slack,slack_stderr,cells_over_bound
inline void write_batch_csv(std::ostream& os, const RegretSummary& s) {
  os << "batch,count,mean_regret,mean_slack,slack_stderr,cells_over_bound\n";
  for (const auto& b : s.hedge_batches)
    os << b.batch << ',' << b.count << ',' << detail::fmt17(b.mean_regret) << ',' << detail::fmt17(b.mean_slack) << ','
       << detail::fmt17(b.slack_stderr) << ',' << b.cells_over_bound << '\n';
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json prior = nlohmann::json::array();
  for (const auto& p : c.prior) prior.push_back({{"alpha", p.alpha()}, {"beta", p.beta()}});
  nlohmann::json roster = nlohmann::json::array();
  for (auto p : c.roster) roster.push_back(to_string(p));
  return {{"n_nodes", c.n_nodes},         {"horizon", c.horizon},
          {"m", c.m},                     {"prior", prior},
          {"step_scale", c.step_scale},   {"outer_trials", c.outer_trials},
          {"inner_trials", c.inner_trials}, {"roster", roster},
          {"seed", c.seed},               {"update_cost", to_string(c.update_cost)},
          {"threads", c.threads},         {"max_work", c.max_work}};
}

inline nlohmann::json summary_metadata(const RegretSummary& s) {
  nlohmann::json final_values = nlohmann::json::object();
  for (const auto& c : s.curves)
    final_values[to_string(c.policy)] = {{"bayesian_sup_regret", c.mean.back()}, {"stderr", c.stderr.back()}};
  return {
      {"config", config_json(s.config)},
      {"master_seed", s.config.seed},
      {"sup_estimator", "max over inner cost sequences (empirical lower bound on the sup over C_T)"},
      {"bound", "(8+2*sqrt(2)) * (m * mean realized V_t * ln N)^(1/3) * t^(2/3)"},
      {"rexp3_order_reference", "(m V_t N ln N)^(1/3) t^(2/3), unit constant: order reference only"},
      {"realized_variation", {{"mean", s.variation_mean}, {"min", s.variation_min}, {"max", s.variation_max}}},
      {"hedge_batch_size", {{"min", s.hedge_batch_min}, {"max", s.hedge_batch_max}}},
      {"rexp3_batch_size", {{"min", s.rexp3_batch_min}, {"max", s.rexp3_batch_max}}},
      {"t0_mean_variation", s.t0 ? nlohmann::json(*s.t0) : nlohmann::json(nullptr)},
      {"generator_t0", s.config.generator_t0()},
      {"final", final_values},
      {"wall_clock_seconds", s.seconds},
  };
}

}  // namespace mnb
