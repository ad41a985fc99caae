// Command-line front end.
//
// Exit status: 0 success, 1 internal error, 2 usage, 3 parse or I/O error,
// 4 validation failure, 5 numerical failure, 6 resource limit.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mnb/mnb.hpp"

namespace fs = std::filesystem;
using namespace mnb;

namespace {

constexpr const char* kExitCodes =
    "Exit status: 0 ok, 1 internal error, 2 usage, 3 parse/io, 4 validation, 5 numerical, 6 resource limit.";

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::parse: return 3;
    case ErrorKind::validation: return 4;
    case ErrorKind::numerical: return 5;
    case ErrorKind::resource: return 6;
  }
  return 1;
}

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  int threads = 1;
  bool threads_set = false;
  std::string out_dir = ".";
};

fs::path out_path(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) fail(ErrorKind::parse, "cannot create output directory '" + g.out_dir + "': " + ec.message());
  return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) fail(ErrorKind::parse, "cannot write '" + p.string() + "'");
  return os;
}

void apply_globals(ExperimentConfig& c, const Globals& g) {
  if (g.seed_set) c.seed = g.seed;
  if (g.threads_set) c.threads = g.threads;
}

std::string fmt(double x, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

void write_experiment(const Globals& g, const std::string& stem, const RegretSummary& s) {
  {
    auto os = open_out(out_path(g, stem + ".csv"));
    write_summary_csv(os, s);
  }
  {
    auto os = open_out(out_path(g, stem + "_reference.csv"));
    write_reference_csv(os, s);
  }
  if (!s.hedge_batches.empty()) {
    auto os = open_out(out_path(g, stem + "_batches.csv"));
    write_batch_csv(os, s);
  }
  auto os = open_out(out_path(g, stem + ".json"));
  os << summary_metadata(s).dump(2) << '\n';
}

void print_final(const std::string& label, const RegretSummary& s) {
  std::cout << label;
  for (const auto& c : s.curves)
    std::cout << "  " << to_string(c.policy) << "=" << fmt(c.mean.back()) << " (se " << fmt(c.stderr.back()) << ")";
  std::cout << "  bound=" << fmt(s.bound.back()) << "  [" << fmt(s.seconds, "%.1f") << " s]\n";
}

struct Scale {
  int outer = 200;
  int inner = 50;
  long horizon = 2000;
  int m = 3;
};

void add_scale(CLI::App* cmd, Scale& sc) {
  cmd->add_option("--outer", sc.outer, "Outer trials Q (prior draws)")->capture_default_str();
  cmd->add_option("--inner", sc.inner, "Inner trials L (cost sequences per draw)")->capture_default_str();
  cmd->add_option("--horizon", sc.horizon, "Horizon T")->capture_default_str();
  cmd->add_option("-m", sc.m, "Truncation level m")->capture_default_str();
}

ExperimentConfig base_config(const Scale& sc, const Globals& g) {
  ExperimentConfig c;
  c.outer_trials = sc.outer;
  c.inner_trials = sc.inner;
  c.horizon = sc.horizon;
  c.m = sc.m;
  c.seed = g.seed;
  c.threads = g.threads;
  return c;
}

const std::vector<std::pair<std::string, GammaBelief>> kPriors{{"theta1", GammaBelief(2.0, 2.0)},
                                                                 {"theta2", GammaBelief(1.0, 4.0)}};

void print_regression(const RegressionReport& r) {
  std::cout << "Regression of V_T on T (n = " << r.n << ")\n"
            << "  term        coef          stderr        t             p\n"
            << "  intercept   " << fmt(r.intercept, "%-13.6g") << " " << fmt(r.se_intercept, "%-13.6g") << " "
            << fmt(r.t_intercept, "%-13.6g") << " " << fmt(r.p_intercept, "%.4g") << '\n'
            << "  slope       " << fmt(r.slope, "%-13.6g") << " " << fmt(r.se_slope, "%-13.6g") << " "
            << fmt(r.t_slope, "%-13.6g") << " " << fmt(r.p_slope, "%.4g") << '\n'
            << "ANOVA\n"
            << "  source      df     SS            MS            F             significance\n";
  // Undefined cells (MS of the total row, F of residual and total) print as "-".
  auto cell = [](double x, const char* f) {
    if (!std::isnan(x)) return fmt(x, f);
    return f[1] == '-' ? std::string("-") + std::string(12, ' ') : std::string("-");
  };
  auto row = [&](const char* name, const AnovaRow& a) {
    std::cout << "  " << name << fmt(a.df, "%-6.0f") << " " << fmt(a.ss, "%-13.6g") << " " << cell(a.ms, "%-13.6g")
              << " " << cell(a.f, "%-13.6g") << " " << cell(a.significance, "%.4g") << '\n';
  };
  row("regression  ", r.regression);
  row("residual    ", r.residual);
  row("total       ", r.total);
}

nlohmann::json regression_json(const RegressionReport& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(fmt(x, "%g")); };
  auto row = [&](const AnovaRow& a) {
    return nlohmann::json{{"df", a.df}, {"ss", num(a.ss)}, {"ms", num(a.ms)}, {"f", num(a.f)},
                          {"significance", num(a.significance)}};
  };
  return {{"n", r.n},
          {"intercept", {{"coef", r.intercept}, {"stderr", num(r.se_intercept)}, {"t", num(r.t_intercept)}, {"p", num(r.p_intercept)}}},
          {"slope", {{"coef", r.slope}, {"stderr", num(r.se_slope)}, {"t", num(r.t_slope)}, {"p", num(r.p_slope)}}},
          {"r_squared", num(r.r_squared)},
          {"anova", {{"regression", row(r.regression)}, {"residual", row(r.residual)}, {"total", row(r.total)}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-node bandit defence of distributed generation grids: simulation, OPF attack costs and analysis."};
  app.footer(kExitCodes);
  app.require_subcommand(1);
  Globals g;
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { g.seed = s; g.seed_set = true; },
                                         "Master seed (overrides config files)");
  app.add_option_function<int>("--threads", [&](int t) { g.threads = t; g.threads_set = true; },
                               "Worker threads (overrides config files)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run one experiment from a config file");
  std::string config_path, tag = "simulate";
  simulate->add_option("config", config_path, "Config file (see docs/config.md)")->required();
  simulate->add_option("--tag", tag, "Output file stem")->capture_default_str();

  // compare
  auto* compare = app.add_subcommand("compare", "Thompson-Hedge vs R.EXP3 for both priors and N in {10, 20}");
  Scale cmp_scale;
  double cmp_divisor = 100.0;
  bool cmp_hedge = false;
  add_scale(compare, cmp_scale);
  compare->add_option("--step-divisor", cmp_divisor, "Step scale is 1/(divisor * m)")->capture_default_str();
  compare->add_flag("--with-hedge", cmp_hedge, "Also run Hedge fed the true rates");

  // sensitivity
  auto* sensitivity = app.add_subcommand("sensitivity", "Thompson-Hedge at N = 20 across four step scales");
  Scale sen_scale;
  int sen_nodes = 20;
  add_scale(sensitivity, sen_scale);
  sensitivity->add_option("--nodes", sen_nodes, "Number of nodes N")->capture_default_str();

  // opf-costs
  auto* opf_costs = app.add_subcommand("opf-costs", "Attack-cost matrix from a grid topology and time series");
  std::string grid_path, states_path, costs_name = "costs.csv";
  int opf_m = 3;
  opf_costs->add_option("--grid", grid_path, "Topology CSV")->required()->check(CLI::ExistingFile);
  opf_costs->add_option("--states", states_path, "Time-series CSV")->required()->check(CLI::ExistingFile);
  opf_costs->add_option("-m", opf_m, "Truncation level m")->capture_default_str();
  opf_costs->add_option("--output", costs_name, "Cost CSV file name inside --out-dir")->capture_default_str();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Regression and ANOVA of V_T against T for a cost CSV");
  std::string analyze_path;
  int analyze_m = 3;
  analyze->add_option("costs", analyze_path, "Cost CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("-m", analyze_m, "Truncation level m")->capture_default_str();

  // bound
  auto* bound = app.add_subcommand("bound", "Evaluate the regret bounds");
  int b_m = 3, b_n = 10;
  double b_vt = 10.0, b_t = 1000.0;
  std::optional<double> b_delta;
  bound->add_option("-m,--m", b_m, "Truncation level m")->capture_default_str();
  bound->add_option("--vt", b_vt, "Variation budget V_T")->capture_default_str();
  bound->add_option("--n", b_n, "Number of nodes N")->capture_default_str();
  bound->add_option("--t", b_t, "Horizon T")->capture_default_str();
  bound->add_option("--delta", b_delta, "Also print the per-batch bound for this batch size");

  // synth-states
  auto* synth = app.add_subcommand("synth-states", "Generate a synthetic 15-minute operating time series");
  std::string synth_grid, synth_name = "states.csv";
  long synth_steps = 672;
  double synth_load = 95.0;
  synth->add_option("--grid", synth_grid, "Topology CSV")->required()->check(CLI::ExistingFile);
  synth->add_option("--steps", synth_steps, "Number of 15-minute steps")->capture_default_str();
  synth->add_option("--mean-load", synth_load, "Mean base load per node in kW")->capture_default_str();
  synth->add_option("--output", synth_name, "File name inside --out-dir")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      ExperimentConfig c = load_config_file(config_path);
      apply_globals(c, g);
      const auto s = run_experiment(c);
      write_experiment(g, tag, s);
      print_final(tag, s);
    } else if (*compare) {
      for (int n : {10, 20})
        for (const auto& [name, prior] : kPriors) {
          ExperimentConfig c = base_config(cmp_scale, g);
          c.n_nodes = n;
          c.prior = {prior};
          c.step_scale = 1.0 / (cmp_divisor * c.m);
          c.roster = {PolicyKind::thompson_hedge, PolicyKind::rexp3};
          if (cmp_hedge) c.roster.push_back(PolicyKind::hedge);
          const std::string stem = "compare_" + name + "_n" + std::to_string(n);
          const auto s = run_experiment(c);
          write_experiment(g, stem, s);
          print_final(stem, s);
        }
    } else if (*sensitivity) {
      for (const auto& [name, prior] : kPriors)
        for (int divisor : {200, 100, 50, 20}) {
          ExperimentConfig c = base_config(sen_scale, g);
          c.n_nodes = sen_nodes;
          c.prior = {prior};
          c.step_scale = 1.0 / (divisor * c.m);
          c.roster = {PolicyKind::thompson_hedge};
          const std::string stem = "sensitivity_" + name + "_div" + std::to_string(divisor);
          const auto s = run_experiment(c);
          write_experiment(g, stem, s);
          print_final(stem, s);
        }
    } else if (*opf_costs) {
      const auto grid = grid::load_grid_file(grid_path);
      const auto states = grid::load_states_file(states_path, grid);
      const auto series = opf::cost_timeseries(grid, states, opf_m, g.threads);
      for (const auto& w : series.warnings) std::cerr << "warning: " << w << '\n';
      const auto path = out_path(g, costs_name);
      {
        auto os = open_out(path);
        write_costs_csv(os, series.costs);
      }
      const auto budget = compute_variation(series.costs);
      nlohmann::json meta{{"m", opf_m},
                          {"normalization_constant", series.normalization},
                          {"steps", series.costs.horizon()},
                          {"nodes", series.costs.n_nodes()},
                          {"realized_variation", budget.total()},
                          {"warnings", series.warnings}};
      auto os = open_out(fs::path(path).concat(".meta.json"));
      os << meta.dump(2) << '\n';
      std::cout << "wrote " << path.string() << " (" << series.costs.horizon() << " steps, normalization "
                << fmt(series.normalization) << ", V_T " << fmt(budget.total()) << ")\n";
    } else if (*analyze) {
      std::ifstream in(analyze_path);
      if (!in) fail(ErrorKind::parse, "cannot open '" + analyze_path + "'");
      const auto costs = read_costs_csv(in, analyze_m);
      const auto budget = compute_variation(costs);
      const auto report = regress_variation(budget);
      const bool member = membership_check(costs, budget.total());
      print_regression(report);
      std::cout << "V_T = " << fmt(budget.total()) << " over " << costs.horizon() << " steps; membership "
                << (member ? "ok" : "FAILED") << '\n';
      std::cout << "Assumption threshold: realized T0 = "
                << (budget.t0 ? std::to_string(*budget.t0) : std::string("none")) << ", fitted-line T0 = ";
      nlohmann::json out = regression_json(report);
      try {
        const long t0 = estimate_t0(report, analyze_m);
        std::cout << t0 << '\n';
        out["fitted_t0"] = t0;
      } catch (const Error& e) {
        std::cout << "none (" << e.what() << ")\n";
        out["fitted_t0"] = nullptr;
      }
      out["realized_t0"] = budget.t0 ? nlohmann::json(*budget.t0) : nlohmann::json(nullptr);
      out["variation_total"] = budget.total();
      out["membership"] = member;
      out["m"] = analyze_m;
      auto os = open_out(out_path(g, "analysis.json"));
      os << out.dump(2) << '\n';
      if (!member) return 4;
    } else if (*bound) {
      const double h = hedge_bound(b_m, b_vt, b_n, b_t);
      const double r = rexp3_bound_reference(b_m, b_vt, b_n, b_t);
      std::cout << "hedge_bound            " << fmt(h, "%.6f") << '\n'
                << "rexp3 order reference  " << fmt(r, "%.6f") << "  (order reference, unit constant)\n"
                << "hedge batch size       " << hedge_batch_size(static_cast<long>(b_t), b_m, b_vt, b_n) << '\n'
                << "rexp3 batch size       " << rexp3_batch_size(static_cast<long>(b_t), b_m, b_vt, b_n) << '\n';
      if (b_delta) std::cout << "per_batch_bound        " << fmt(per_batch_bound(*b_delta, b_n), "%.6f") << '\n';
    } else if (*synth) {
      const auto grid = grid::load_grid_file(synth_grid);
      if (synth_steps < 1) fail(ErrorKind::invalid_argument, "--steps must be >= 1");
      auto rng = stream(g.seed, {0x5717});
      std::uniform_real_distribution<double> spread(0.6, 1.4);
      std::vector<double> base(grid.n_nodes());
      for (double& b : base) b = synth_load * spread(rng);
      const auto states = grid::synthesize_states(grid, synth_steps, base, rng);
      std::vector<std::string> stamps;
      for (long k = 0; k < synth_steps; ++k) stamps.push_back(grid::quarter_hour_stamp(k));
      const auto path = out_path(g, synth_name);
      auto os = open_out(path);
      grid::write_states(os, grid, states, stamps);
      std::cout << "wrote " << path.string() << " (" << synth_steps << " steps)\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
