#pragma once

// Attack-count distribution per node and the Gamma belief over its rate.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mnb/error.hpp"
#include "mnb/random.hpp"

namespace mnb {

/// Number of nodes in the grid. At least two, so that ln N > 0.
class NodeSet {
 public:
  explicit NodeSet(int n) : n_(n) {
    if (n < 2) fail(ErrorKind::invalid_argument, "node set needs at least 2 nodes, got " + std::to_string(n));
  }
  int size() const noexcept { return n_; }
  double log_size() const noexcept { return std::log(static_cast<double>(n_)); }

 private:
  int n_;
};

/// Poisson(lambda) attack counts with all mass at or above m folded onto m.
class TruncatedPoissonModel {
 public:
  TruncatedPoissonModel(double lambda, int m) : lambda_(lambda), m_(m) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      fail(ErrorKind::invalid_argument, "attack rate must be finite and >= 0");
    if (m < 1) fail(ErrorKind::invalid_argument, "truncation level m must be >= 1");
  }

  double lambda() const noexcept { return lambda_; }
  int m() const noexcept { return m_; }

 private:
  double lambda_;
  int m_;
};

/// Probability of observing k attacks. The top cell k = m carries the whole
/// upper tail, computed as a clamped complement.
inline double pmf(const TruncatedPoissonModel& model, int k) {
  const int m = model.m();
  const double lambda = model.lambda();
  if (k < 0 || k > m) return 0.0;
  double term = std::exp(-lambda);
  double below = 0.0;
  for (int j = 0; j < m; ++j) {
    if (j == k) return term;
    below += term;
    term *= lambda / (j + 1);
  }
  return std::clamp(1.0 - below, 0.0, 1.0);
}

/// Mean attack count mu = sum_{k<m} k pmf(k) + m pmf(m), in [0, m].
inline double mean_attacks(double lambda, int m) {
  double term = std::exp(-lambda);
  double below = term;
  double mean = 0.0;
  for (int k = 1; k < m; ++k) {
    term *= lambda / k;
    below += term;
    mean += k * term;
  }
  const double tail = std::clamp(1.0 - below, 0.0, 1.0);
  return std::clamp(mean + m * tail, 0.0, static_cast<double>(m));
}

inline double mean_attacks(const TruncatedPoissonModel& model) {
  return mean_attacks(model.lambda(), model.m());
}

/// Poisson draw by sequential CDF inversion, stopped at m (equivalent to
/// min(draw, m)).
template <class URBG>
int sample_attacks(const TruncatedPoissonModel& model, URBG& rng) {
  const double u = uniform01(rng);
  const double lambda = model.lambda();
  double term = std::exp(-lambda);
  double cdf = term;
  int k = 0;
  while (u >= cdf && k < model.m()) {
    ++k;
    term *= lambda / k;
    cdf += term;
  }
  return k;
}

/// Gamma(shape alpha, rate beta) belief over an attack rate; mean alpha/beta.
class GammaBelief {
 public:
  GammaBelief(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
      fail(ErrorKind::invalid_argument, "Gamma belief needs finite alpha > 0 and beta > 0");
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double mean() const noexcept { return alpha_ / beta_; }
  double variance() const noexcept { return alpha_ / (beta_ * beta_); }

  friend bool operator==(const GammaBelief&, const GammaBelief&) = default;

 private:
  double alpha_;
  double beta_;
};

/// Posterior after observing k attacks in one period: (alpha + k, beta + 1).
inline GammaBelief update_belief(const GammaBelief& belief, int k, int m) {
  if (k < 0 || k > m)
    fail(ErrorKind::invalid_argument,
         "observed count " + std::to_string(k) + " outside [0, " + std::to_string(m) + "]");
  return GammaBelief(belief.alpha() + k, belief.beta() + 1.0);
}

template <class URBG>
double sample_rate(const GammaBelief& belief, URBG& rng) {
  std::gamma_distribution<double> gamma(belief.alpha(), 1.0 / belief.beta());
  return gamma(rng);
}

}  // namespace mnb
