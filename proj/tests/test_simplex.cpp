#include <cmath>

#include <gtest/gtest.h>

#include "mnb/simplex.hpp"

using namespace mnb;
using lp::kInf;

TEST(Simplex, TextbookMaximization) {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18, x, y >= 0  -> (2, 6), 36
  lp::LinearProgram p;
  const int x = p.add_variable(-3, 0, kInf), y = p.add_variable(-5, 0, kInf);
  p.add_inequality(4).coeffs[x] = 1;
  p.add_inequality(12).coeffs[y] = 2;
  auto& r = p.add_inequality(18);
  r.coeffs[x] = 3;
  r.coeffs[y] = 2;
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.x[x], 2, 1e-12);
  EXPECT_NEAR(s.x[y], 6, 1e-12);
  EXPECT_NEAR(s.objective, -36, 1e-12);
}

TEST(Simplex, EqualitiesFreeAndUpperOnlyVariables) {
  // min x - y  s.t. x + y = 1, x free, y <= 3 (no lower bound): y = 3, x = -2
  lp::LinearProgram p;
  const int x = p.add_variable(1, -kInf, kInf), y = p.add_variable(-1, -kInf, 3);
  auto& e = p.add_equality(1);
  e.coeffs[x] = 1;
  e.coeffs[y] = 1;
  p.add_inequality(10).coeffs[x] = -1;  // x >= -10 keeps it bounded
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.x[y], 3, 1e-12);
  EXPECT_NEAR(s.x[x], -2, 1e-12);
  EXPECT_NEAR(s.objective, -5, 1e-12);
}

TEST(Simplex, BoxedVariablesWithNegativeLower) {
  lp::LinearProgram p;
  const int x = p.add_variable(1, -2, 5), y = p.add_variable(2, -1, 1);
  auto& r = p.add_inequality(-2);  // x + y >= 2
  r.coeffs[x] = -1;
  r.coeffs[y] = -1;
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.x[x], 3, 1e-12);
  EXPECT_NEAR(s.x[y], -1, 1e-12);
  EXPECT_NEAR(s.objective, 1, 1e-12);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
  {
    lp::LinearProgram p;
    const int x = p.add_variable(1, 0, 1);
    p.add_equality(2).coeffs[x] = 1;
    EXPECT_EQ(lp::solve(p).status, lp::Status::infeasible);
  }
  {
    lp::LinearProgram p;
    p.add_variable(-1, 0, kInf);
    EXPECT_EQ(lp::solve(p).status, lp::Status::unbounded);
  }
  {
    lp::LinearProgram p;
    p.add_variable(1, 2, 1);
    EXPECT_EQ(lp::solve(p).status, lp::Status::infeasible);
  }
}

TEST(Simplex, RedundantEqualityRowsAreTolerated) {
  lp::LinearProgram p;
  const int x = p.add_variable(1, 0, kInf), y = p.add_variable(1, 0, kInf);
  for (int k = 1; k <= 3; ++k) {
    auto& e = p.add_equality(2.0 * k);
    e.coeffs[x] = k;
    e.coeffs[y] = k;
  }
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.objective, 2, 1e-12);
  EXPECT_NEAR(s.x[x] + s.x[y], 2, 1e-12);
}

TEST(Simplex, DegenerateCyclingExampleTerminates) {
  // Beale's classic cycling instance; optimum -1/20 at (1/25, 0, 1, 0).
  lp::LinearProgram p;
  const int x1 = p.add_variable(-0.75, 0, kInf), x2 = p.add_variable(150, 0, kInf),
            x3 = p.add_variable(-0.02, 0, kInf), x4 = p.add_variable(6, 0, kInf);
  auto& r1 = p.add_inequality(0);
  r1.coeffs = {0.25, -60, -0.04, 9};
  auto& r2 = p.add_inequality(0);
  r2.coeffs = {0.5, -90, -0.02, 3};
  p.add_inequality(1).coeffs[x3] = 1;
  lp::Options opt;
  opt.degenerate_switch = 0;
  for (const auto& o : {lp::Options{}, opt}) {
    const auto s = lp::solve(p, o);
    ASSERT_EQ(s.status, lp::Status::optimal);
    EXPECT_NEAR(s.objective, -0.05, 1e-12);
    EXPECT_NEAR(s.x[x1], 0.04, 1e-12);
    EXPECT_NEAR(s.x[x3], 1.0, 1e-12);
    (void)x2;
    (void)x4;
  }
}

TEST(Simplex, IterationLimitIsReported) {
  lp::LinearProgram p;
  const int x = p.add_variable(-1, 0, 5), y = p.add_variable(-1, 0, 5);
  auto& r = p.add_inequality(8);
  r.coeffs[x] = 1;
  r.coeffs[y] = 1;
  lp::Options o;
  o.max_iterations = 0;
  EXPECT_EQ(lp::solve(p, o).status, lp::Status::iteration_limit);
}

TEST(Simplex, RejectsMalformedRows) {
  lp::LinearProgram p;
  p.add_variable(1, 0, 1);
  p.equalities.push_back({{1.0, 2.0}, 1.0});
  EXPECT_THROW(lp::solve(p), Error);
}
