#include <sstream>

#include <gtest/gtest.h>

#include "mnb/config.hpp"

using namespace mnb;

namespace {

std::string parse_error(const std::string& text) {
  std::stringstream ss(text);
  try {
    parse_config(ss);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesAllSections) {
  std::stringstream ss(R"(# comment
[experiment]
n_nodes = 20
horizon = 2000
m = 3
step_divisor = 100

[prior]
alpha = 1
beta = 4

[trials]
outer = 200
inner = 50

[policies]
roster = thompson_hedge, hedge, rexp3
update_cost = chosen

[run]
seed = 9
threads = 2
max_work = 1e13
)");
  const auto c = parse_config(ss);
  EXPECT_EQ(c.n_nodes, 20);
  EXPECT_EQ(c.horizon, 2000);
  EXPECT_DOUBLE_EQ(c.step_scale, 1.0 / 300.0);
  ASSERT_EQ(c.prior.size(), 1u);
  EXPECT_EQ(c.prior[0], GammaBelief(1, 4));
  EXPECT_EQ(c.outer_trials, 200);
  EXPECT_EQ(c.inner_trials, 50);
  EXPECT_EQ(c.roster, (std::vector<PolicyKind>{PolicyKind::thompson_hedge, PolicyKind::hedge, PolicyKind::rexp3}));
  EXPECT_EQ(c.update_cost, UpdateCost::chosen);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.max_work, 1e13);
}

TEST(Config, DefaultsAndPriorLists) {
  std::stringstream empty("");
  const auto d = parse_config(empty);
  EXPECT_EQ(d.n_nodes, ExperimentConfig{}.n_nodes);
  std::stringstream ss("[experiment]\nn_nodes = 3\n[prior]\nalpha = 1, 2, 3\nbeta = 2\n");
  const auto c = parse_config(ss);
  ASSERT_EQ(c.prior.size(), 3u);
  EXPECT_EQ(c.prior[2], GammaBelief(3, 2));
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error("[experiment]\n\nn_node = 3\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error("[experiment]\n\nn_node = 3\n").find("n_node"), std::string::npos);
  EXPECT_NE(parse_error("[bogus]\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error("[run]\nseed = 1\nseed = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(parse_error("[run]\nseed = 1.5\n").find("integer"), std::string::npos);
  EXPECT_NE(parse_error("m = 3\n").find("outside"), std::string::npos);
  EXPECT_NE(parse_error("[experiment]\nstep_scale = 0.01\nstep_divisor = 100\n").find("not both"), std::string::npos);
  EXPECT_NE(parse_error("[prior]\nalpha = 1, 2\nbeta = 1, 2, 3\n").find("differ"), std::string::npos);
  EXPECT_NE(parse_error("[prior]\nalpha = 1\n").find("both"), std::string::npos);
  EXPECT_NE(parse_error("[experiment]\nhorizon = abc\n").find("line 2"), std::string::npos);
}

TEST(Config, WriteParseRoundTrip) {
  ExperimentConfig c;
  c.n_nodes = 3;
  c.prior = {GammaBelief(0.7, 1.3), GammaBelief(2, 2), GammaBelief(5, 0.25)};
  c.step_scale = 1.0 / 700.0;
  c.roster = {PolicyKind::hedge};
  c.update_cost = UpdateCost::chosen;
  c.seed = 123456789;
  std::stringstream ss;
  write_config(ss, c);
  const auto back = parse_config(ss);
  EXPECT_EQ(back.prior, c.prior);
  EXPECT_EQ(back.step_scale, c.step_scale);
  EXPECT_EQ(back.roster, c.roster);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(config_json(back), config_json(c));
}

TEST(Config, BundledExampleLoads) {
  const auto c = load_config_file(std::string(MNB_DATA_DIR) + "/example.cfg");
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(load_config_file("/nonexistent/x.cfg"), Error);
}
