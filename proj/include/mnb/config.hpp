#pragma once

// Experiment configuration files: `key = value` lines grouped under
// [experiment], [prior], [trials], [policies] and [run]. Blank lines and
// lines starting with '#' or ';' are ignored. Unknown sections and keys are
// errors. See docs/config.md.

#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mnb/error.hpp"
#include "mnb/experiment.hpp"
#include "mnb/grid.hpp"

namespace mnb {

namespace detail {

inline std::vector<double> number_list(const std::string& value, const std::string& ctx) {
  std::vector<double> out;
  for (const auto& cell : grid::detail::split_csv(value)) out.push_back(grid::detail::to_number(cell, ctx));
  if (out.empty()) fail(ErrorKind::parse, ctx + ": empty list");
  return out;
}

inline long integer(const std::string& value, const std::string& ctx) {
  const double x = grid::detail::to_number(value, ctx);
  if (x != std::floor(x) || std::abs(x) > 9e15) fail(ErrorKind::parse, ctx + ": expected an integer, got '" + value + "'");
  return static_cast<long>(x);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
  static const std::map<std::string, std::set<std::string>> schema{
      {"experiment", {"n_nodes", "horizon", "m", "step_scale", "step_divisor"}},
      {"prior", {"alpha", "beta"}},
      {"trials", {"outer", "inner"}},
      {"policies", {"roster", "update_cost"}},
      {"run", {"seed", "threads", "max_work"}},
  };
  ExperimentConfig c;
  std::string line, section;
  long line_no = 0;
  std::set<std::string> seen;
  std::vector<double> alpha, beta;
  std::optional<double> step_divisor;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string ctx = "config line " + std::to_string(line_no);
    line = grid::detail::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::parse, ctx + ": unterminated section tag");
      section = grid::detail::trim(line.substr(1, line.size() - 2));
      if (!schema.count(section)) fail(ErrorKind::parse, ctx + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::parse, ctx + ": expected 'key = value'");
    if (section.empty()) fail(ErrorKind::parse, ctx + ": key outside any section");
    const std::string key = grid::detail::trim(line.substr(0, eq));
    const std::string value = grid::detail::trim(line.substr(eq + 1));
    if (!schema.at(section).count(key)) fail(ErrorKind::parse, ctx + ": unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) fail(ErrorKind::parse, ctx + ": duplicate key '" + full + "'");
    if (value.empty()) fail(ErrorKind::parse, ctx + ": empty value for '" + full + "'");

    if (full == "experiment.n_nodes") c.n_nodes = static_cast<int>(detail::integer(value, ctx));
    else if (full == "experiment.horizon") c.horizon = detail::integer(value, ctx);
    else if (full == "experiment.m") c.m = static_cast<int>(detail::integer(value, ctx));
    else if (full == "experiment.step_scale") c.step_scale = grid::detail::to_number(value, ctx);
    else if (full == "experiment.step_divisor") step_divisor = grid::detail::to_number(value, ctx);
    else if (full == "prior.alpha") alpha = detail::number_list(value, ctx);
    else if (full == "prior.beta") beta = detail::number_list(value, ctx);
    else if (full == "trials.outer") c.outer_trials = static_cast<int>(detail::integer(value, ctx));
    else if (full == "trials.inner") c.inner_trials = static_cast<int>(detail::integer(value, ctx));
    else if (full == "policies.update_cost") c.update_cost = parse_update_cost(value);
    else if (full == "policies.roster") {
      c.roster.clear();
      for (const auto& p : grid::detail::split_csv(value)) c.roster.push_back(parse_policy(p));
    } else if (full == "run.seed") {
      const long s = detail::integer(value, ctx);
      if (s < 0) fail(ErrorKind::parse, ctx + ": seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (full == "run.threads") c.threads = static_cast<int>(detail::integer(value, ctx));
    else if (full == "run.max_work") c.max_work = grid::detail::to_number(value, ctx);
  }
  if (seen.count("experiment.step_scale") && step_divisor)
    fail(ErrorKind::parse, "config: give step_scale or step_divisor, not both");
  if (step_divisor) {
    if (!(*step_divisor > 0.0)) fail(ErrorKind::parse, "config: step_divisor must be positive");
    c.step_scale = 1.0 / (*step_divisor * c.m);
  }
  if (alpha.empty() != beta.empty()) fail(ErrorKind::parse, "config: [prior] needs both alpha and beta");
  if (!alpha.empty()) {
    if (alpha.size() != beta.size() && alpha.size() != 1 && beta.size() != 1)
      fail(ErrorKind::parse, "config: prior alpha and beta lists differ in length");
    const std::size_t k = std::max(alpha.size(), beta.size());
    c.prior.clear();
    for (std::size_t i = 0; i < k; ++i)
      c.prior.emplace_back(alpha[alpha.size() == 1 ? 0 : i], beta[beta.size() == 1 ? 0 : i]);
  }
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open config file '" + path + "'");
  return parse_config(in);
}

inline void write_config(std::ostream& os, const ExperimentConfig& c) {
  auto list = [&](auto get) {
    std::string s;
    for (std::size_t i = 0; i < c.prior.size(); ++i) s += (i ? ", " : "") + detail::fmt17(get(c.prior[i]));
    return s;
  };
  os << "[experiment]\nn_nodes = " << c.n_nodes << "\nhorizon = " << c.horizon << "\nm = " << c.m
     << "\nstep_scale = " << detail::fmt17(c.step_scale) << "\n\n[prior]\nalpha = "
     << list([](const GammaBelief& b) { return b.alpha(); }) << "\nbeta = "
     << list([](const GammaBelief& b) { return b.beta(); }) << "\n\n[trials]\nouter = " << c.outer_trials
     << "\ninner = " << c.inner_trials << "\n\n[policies]\nroster = ";
  for (std::size_t i = 0; i < c.roster.size(); ++i) os << (i ? ", " : "") << to_string(c.roster[i]);
  os << "\nupdate_cost = " << to_string(c.update_cost) << "\n\n[run]\nseed = " << c.seed << "\nthreads = " << c.threads
     << "\nmax_work = " << detail::fmt17(c.max_work) << '\n';
}

}  // namespace mnb
