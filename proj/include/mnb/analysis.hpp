#pragma once

// Simple linear regression of the cumulative variation V_T on T, with the
// coefficient table and ANOVA decomposition used to check that V_T grows
// linearly (and hence crosses 1/m at a finite T0).

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mnb/adversary.hpp"
#include "mnb/error.hpp"

namespace mnb {

struct AnovaRow {
  double df = 0.0;
  double ss = 0.0;
  double ms = std::numeric_limits<double>::quiet_NaN();
  double f = std::numeric_limits<double>::quiet_NaN();
  double significance = std::numeric_limits<double>::quiet_NaN();
};

struct RegressionReport {
  long n = 0;
  double intercept = 0.0, slope = 0.0;
  double se_intercept = 0.0, se_slope = 0.0;
  double t_intercept = 0.0, t_slope = 0.0;
  double p_intercept = 0.0, p_slope = 0.0;
  double r_squared = 0.0;
  AnovaRow regression, residual, total;
};

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
inline double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

/// Upper-tail probability of an F(d1, d2) statistic.
inline double f_upper_p(double f, double d1, double d2) {
  if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(f)) return 0.0;
  const boost::math::fisher_f dist(d1, d2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

/// OLS of y on x with intercept.
inline RegressionReport regress(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::invalid_argument, "regress: x and y differ in length");
  const long n = static_cast<long>(x.size());
  if (n < 3) fail(ErrorKind::invalid_argument, "regress: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (long i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (long i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) fail(ErrorKind::validation, "regress: regressor is constant");

  RegressionReport r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss_res = 0.0;
  for (long i = 0; i < n; ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    ss_res += e * e;
  }
  const double ss_reg = r.slope * r.slope * sxx;
  const double df_res = static_cast<double>(n - 2);

  r.regression = {1.0, ss_reg, ss_reg, 0.0, 0.0};
  r.residual = {df_res, ss_res, ss_res / df_res};
  r.total = {static_cast<double>(n - 1), syy};
  r.regression.f = r.residual.ms > 0.0 ? r.regression.ms / r.residual.ms : std::numeric_limits<double>::infinity();
  if (ss_reg == 0.0 && ss_res == 0.0) r.regression.f = std::numeric_limits<double>::quiet_NaN();
  r.regression.significance = f_upper_p(r.regression.f, 1.0, df_res);
  r.r_squared = syy > 0.0 ? ss_reg / syy : 1.0;

  const double s2 = r.residual.ms;
  r.se_slope = std::sqrt(s2 / sxx);
  r.se_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  auto tstat = [](double coef, double se) {
    if (se > 0.0) return coef / se;
    if (coef == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::copysign(std::numeric_limits<double>::infinity(), coef);
  };
  r.t_slope = tstat(r.slope, r.se_slope);
  r.t_intercept = tstat(r.intercept, r.se_intercept);
  r.p_slope = t_two_sided_p(r.t_slope, df_res);
  r.p_intercept = t_two_sided_p(r.t_intercept, df_res);
  return r;
}

/// Regression of V_T on T over T = 2..horizon. V_1 = 0 by definition and is
/// left out.
inline RegressionReport regress_variation(const VariationBudget& budget) {
  const std::size_t n = budget.v.size();
  if (n < 4) fail(ErrorKind::invalid_argument, "regress_variation: need at least 3 points after T = 1");
  std::vector<double> x(n - 1), y(n - 1);
  for (std::size_t t = 1; t < n; ++t) {
    x[t - 1] = static_cast<double>(t + 1);
    y[t - 1] = budget.v[t];
  }
  return regress(x, y);
}

/// Smallest integer T >= 1 with intercept + slope * T >= 1/m on the fitted line.
inline long estimate_t0(const RegressionReport& r, int m) {
  if (m < 1) fail(ErrorKind::invalid_argument, "estimate_t0: m must be >= 1");
  const double target = 1.0 / m;
  constexpr double tol = 1e-12;
  auto reached = [&](long t) { return r.intercept + r.slope * static_cast<double>(t) >= target - tol; };
  if (reached(1)) return 1;
  if (!(r.slope > 0.0)) fail(ErrorKind::validation, "estimate_t0: fitted slope is not positive; the line never reaches 1/m");
  const double x = std::ceil((target - r.intercept) / r.slope);
  if (x > 9e15) fail(ErrorKind::numerical, "estimate_t0: crossing time out of range");
  long t = std::max(1L, static_cast<long>(x));
  while (t > 1 && reached(t - 1)) --t;
  while (!reached(t)) ++t;
  return t;
}

}  // namespace mnb
