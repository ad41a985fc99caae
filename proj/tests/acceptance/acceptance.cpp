// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// `--quick` shrinks the Monte-Carlo sizes for smoke runs; ctest uses full size.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mnb/mnb.hpp"
#include "opf_oracle.hpp"
#include "random_grid.hpp"
#include "stats.hpp"

namespace fs = std::filesystem;
using namespace mnb;

namespace {

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + MNB_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double pooled(double a, double b) { return std::sqrt(a * a + b * b); }

struct Prior {
  std::string name;
  GammaBelief belief;
};

const std::vector<Prior> kPriors{{"theta1", GammaBelief(2.0, 2.0)}, {"theta2", GammaBelief(1.0, 4.0)}};

struct Sizes {
  int outer = 200, inner = 50;
  long horizon = 2000;
};

ExperimentConfig config_for(const Sizes& z, const Prior& p, int n, double divisor, std::vector<PolicyKind> roster) {
  ExperimentConfig c;
  c.n_nodes = n;
  c.horizon = z.horizon;
  c.m = 3;
  c.prior = {p.belief};
  c.step_scale = 1.0 / (divisor * c.m);
  c.outer_trials = z.outer;
  c.inner_trials = z.inner;
  c.roster = std::move(roster);
  c.seed = 20240601;
  c.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return c;
}

void save(const fs::path& dir, const std::string& stem, const RegretSummary& s) {
  std::ofstream(dir / (stem + ".csv")) << [&] {
    std::stringstream ss;
    write_summary_csv(ss, s);
    return ss.str();
  }();
  std::ofstream(dir / (stem + "_batches.csv")) << [&] {
    std::stringstream ss;
    write_batch_csv(ss, s);
    return ss.str();
  }();
  std::ofstream(dir / (stem + ".json")) << summary_metadata(s).dump(2) << '\n';
}

// Violations of curve <= bound over t = 2..T; V_1 = 0 makes the t = 1 bound zero.
struct BoundScan {
  long violations = 0;
  long first_violation = 0;
  double max_ratio = 0.0;
  long at = 0;
};

BoundScan scan(const PolicyCurve& c, const std::vector<double>& bound) {
  BoundScan r;
  for (std::size_t t = 1; t < c.mean.size(); ++t) {
    const double ratio = c.mean[t] / bound[t];
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.at = static_cast<long>(t + 1);
    }
    if (c.mean[t] > bound[t]) {
      if (!r.violations) r.first_violation = static_cast<long>(t + 1);
      ++r.violations;
    }
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  Sizes z;
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  if (quick) z = Sizes{20, 10, 2000};
  const fs::path out = fs::current_path() / "acceptance_out";
  fs::create_directories(out);
  std::vector<Verdict> verdicts;
  std::cout << "acceptance: Q=" << z.outer << " L=" << z.inner << " T=" << z.horizon << ", outputs in " << out.string()
            << std::endl;

  // Criteria 1, 2, 3, 5: the four main configurations with all three policies.
  std::map<std::pair<std::string, int>, RegretSummary> main_runs;
  for (int n : {10, 20})
    for (const auto& p : kPriors) {
      const auto c = config_for(z, p, n, 100.0, {PolicyKind::thompson_hedge, PolicyKind::hedge, PolicyKind::rexp3});
      auto s = run_experiment(c);
      const std::string stem = p.name + "_n" + std::to_string(n);
      save(out, stem, s);
      std::cout << "  ran " << stem << " in " << fmt("%.1f", s.seconds) << " s: TH " << fmt("%.2f", s.curve(PolicyKind::thompson_hedge).mean.back())
                << ", Hedge " << fmt("%.2f", s.curve(PolicyKind::hedge).mean.back()) << ", R.EXP3 "
                << fmt("%.2f", s.curve(PolicyKind::rexp3).mean.back()) << ", bound " << fmt("%.1f", s.bound.back())
                << ", mean V_T " << fmt("%.3f", s.variation_mean) << std::endl;
      main_runs.emplace(std::pair{p.name, n}, std::move(s));
    }

  for (auto [id, kind] : {std::pair{1, PolicyKind::thompson_hedge}, std::pair{2, PolicyKind::hedge}}) {
    bool pass = true;
    std::string detail;
    for (const auto& [key, s] : main_runs) {
      const auto r = scan(s.curve(kind), s.bound);
      pass = pass && r.violations == 0;
      detail += key.first + "/N=" + std::to_string(key.second) + ": " + std::to_string(r.violations) +
                " violations, max R/bound " + fmt("%.4f", r.max_ratio) + " at t=" + std::to_string(r.at) + "; ";
    }
    verdicts.push_back({id, pass, detail + "checked t=2..T against mean realized V_t"});
  }

  {
    bool pass = true;
    std::string detail;
    for (const auto& [key, s] : main_runs) {
      const auto& th = s.curve(PolicyKind::thompson_hedge);
      const auto& r3 = s.curve(PolicyKind::rexp3);
      const double gap = r3.mean.back() - th.mean.back();
      const double se = pooled(th.stderr.back(), r3.stderr.back());
      const bool ok = gap > 2.0 * se;
      pass = pass && ok;
      detail += key.first + "/N=" + std::to_string(key.second) + ": R3-TH " + fmt("%.2f", gap) + " vs 2SE " +
                fmt("%.2f", 2.0 * se) + (ok ? "" : " (no)") + "; ";
    }
    for (const auto& p : kPriors) {
      const auto& a = main_runs.at({p.name, 10});
      const auto& b = main_runs.at({p.name, 20});
      const double th = b.curve(PolicyKind::thompson_hedge).mean.back() / a.curve(PolicyKind::thompson_hedge).mean.back();
      const double r3 = b.curve(PolicyKind::rexp3).mean.back() / a.curve(PolicyKind::rexp3).mean.back();
      pass = pass && th < r3;
      detail += p.name + " N-ratio TH " + fmt("%.4f", th) + " vs R3 " + fmt("%.4f", r3) + (th < r3 ? "" : " (no)") + "; ";
    }
    verdicts.push_back({3, pass, detail});
  }

  {
    bool pass = true;
    std::string detail;
    for (const auto& p : kPriors) {
      std::map<int, RegretSummary> runs;
      for (int divisor : {200, 50, 20}) {
        const auto c = config_for(z, p, 20, divisor, {PolicyKind::thompson_hedge});
        auto s = run_experiment(c);
        save(out, "sensitivity_" + p.name + "_div" + std::to_string(divisor), s);
        std::cout << "  ran sensitivity " << p.name << " 1/(" << divisor << "m) in " << fmt("%.1f", s.seconds)
                  << " s: TH " << fmt("%.2f", s.curve(PolicyKind::thompson_hedge).mean.back()) << std::endl;
        runs.emplace(divisor, std::move(s));
      }
      const auto& mid = main_runs.at({p.name, 20});
      const std::vector<const PolicyCurve*> order{&runs.at(200).curve(PolicyKind::thompson_hedge),
                                                  &mid.curve(PolicyKind::thompson_hedge),
                                                  &runs.at(50).curve(PolicyKind::thompson_hedge),
                                                  &runs.at(20).curve(PolicyKind::thompson_hedge)};
      detail += p.name + ":";
      for (std::size_t k = 0; k < order.size(); ++k) detail += " " + fmt("%.2f", order[k]->mean.back());
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const double lo = order[k]->mean.back(), hi = order[k + 1]->mean.back();
        const double se = pooled(order[k]->stderr.back(), order[k + 1]->stderr.back());
        if (hi < lo - se) {
          pass = false;
          detail += " (drop at step " + std::to_string(k + 1) + ")";
        }
      }
      detail += "; ";
    }
    verdicts.push_back({4, pass, detail + "divisors 200, 100, 50, 20 at N=20"});
  }

  {
    bool pass = true;
    long batches = 0, cells_over = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& [key, s] : main_runs)
      for (const auto& b : s.hedge_batches) {
        ++batches;
        cells_over += b.cells_over_bound;
        const double margin = b.mean_slack + 3.0 * b.slack_stderr;
        worst = std::min(worst, b.mean_slack);
        if (margin < 0.0) pass = false;
      }
    verdicts.push_back({5, pass,
                        std::to_string(batches) + " batch indices over 4 configs; smallest mean slack " +
                            fmt("%.3f", worst) + "; individual cells above bound: " + std::to_string(cells_over)});
  }

  {
    const auto started = std::chrono::steady_clock::now();
    auto rng = stream(606, {});
    double worst_rel = 0.0, worst_res = 0.0;
    bool pass = true;
    for (int k = 0; k < 100; ++k) {
      const auto inst = testgrid::random_instance(rng);
      const auto s = opf::solve_lp(opf::build_lp(inst.grid, inst.state), inst.grid);
      const auto ref = oracle::brute_force(inst.grid, inst.state);
      const double rel = std::abs(s.objective - ref.objective) / std::max(1.0, std::abs(ref.objective));
      const double res = opf::balance_residual(inst.grid, inst.state, s);
      worst_rel = std::max(worst_rel, rel);
      worst_res = std::max(worst_res, res);
      if (!(rel <= 1e-5) || !(res <= 1e-6) || ref.feasible == 0) pass = false;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    pass = pass && secs <= 120.0;
    verdicts.push_back({6, pass,
                        "worst relative gap " + fmt("%.2e", worst_rel) + ", worst balance residual " +
                            fmt("%.2e", worst_res) + " kW, " + fmt("%.2f", secs) + " s"});
  }

  {
    const fs::path dir = out / "pipeline";
    fs::create_directories(dir);
    const std::string data = MNB_DATA_DIR;
    const int rc1 = run_cli("--out-dir \"" + dir.string() + "\" opf-costs --grid " + data + "/grid11.csv --states " + data +
                                "/week_states.csv --output costs.csv",
                            dir / "opf.log");
    const int rc2 = run_cli("--out-dir \"" + dir.string() + "\" analyze " + (dir / "costs.csv").string(), dir / "analyze.log");
    bool pass = rc1 == 0 && rc2 == 0;
    std::string detail = "exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2);
    if (pass) {
      std::ifstream in(dir / "costs.csv");
      const auto costs = read_costs_csv(in, 3);
      const auto budget = compute_variation(costs);
      const bool member = membership_check(costs, budget.total());
      const auto report = nlohmann::json::parse(slurp(dir / "analysis.json"));
      const auto& anova = report["anova"];
      const double p = report["slope"]["p"].get<double>();
      const double ss_reg = anova["regression"]["ss"].get<double>(), ss_res = anova["residual"]["ss"].get<double>(),
                   ss_tot = anova["total"]["ss"].get<double>();
      const double rel = std::abs(ss_tot - ss_reg - ss_res) / ss_tot;
      pass = member && costs.horizon() == 672 && p < 0.01 && rel <= 1e-6;
      detail += ", steps " + std::to_string(costs.horizon()) + ", membership " + (member ? "ok" : "FAILED") +
                ", slope " + fmt("%.5f", report["slope"]["coef"].get<double>()) + " p=" + fmt("%.3g", p) +
                ", SS identity rel " + fmt("%.2e", rel) + ", df " +
                std::to_string(static_cast<long>(anova["residual"]["df"].get<double>()));
    }
    verdicts.push_back({7, pass, detail});
  }

  {
    // Posterior sampling is exchangeable with a fresh draw from the same posterior.
    const int m = 3, reps = 10'000;
    GammaBelief history(2, 2);
    for (int k : {1, 0, 2, 0, 1, 3, 0}) history = update_belief(history, k, m);
    const std::vector<double> costs{0.1, 0.2};
    auto aux = stream(808, {1});
    std::vector<double> sampled(reps), fresh(reps);
    for (int r = 0; r < reps; ++r) {
      auto s = make_thompson_hedge_state({history, GammaBelief(1, 1)}, m, 1.1, 10);
      s = thompson_hedge_update(s, StepOutcome{0, 1, 0.1, costs}, aux);
      sampled[r] = s.sampled_mu[0];
    }
    const GammaBelief post = update_belief(history, 1, m);
    auto other = stream(808, {2});
    std::exponential_distribution<double> expo(1.0);
    for (int r = 0; r < reps; ++r) {
      double sum = 0.0;
      for (int k = 0; k < static_cast<int>(post.alpha()); ++k) sum += expo(other);
      fresh[r] = mean_attacks(sum / post.beta(), m);
    }
    const double ks_p = teststats::ks_p_value(teststats::ks_statistic(sampled, fresh), reps, reps);

    double worst_norm = 0.0;
    for (int li = 0; li <= 200; ++li)
      for (int mm = 1; mm <= 10; ++mm) {
        const TruncatedPoissonModel model(0.25 * li, mm);
        double total = 0.0;
        for (int k = 0; k <= mm; ++k) total += pmf(model, k);
        worst_norm = std::max(worst_norm, std::abs(total - 1.0));
      }

    auto rng = stream(808, {3});
    std::poisson_distribution<int> poisson(0.5);
    GammaBelief b(2, 2);
    for (int i = 0; i < 10'000; ++i) b = update_belief(b, std::min(poisson(rng), m), m);
    const double recovery = std::abs(b.mean() - 0.5) / 0.5;

    const bool pass = ks_p > 0.01 && worst_norm <= 1e-12 && recovery <= 0.05;
    verdicts.push_back({8, pass,
                        "KS p " + fmt("%.3f", ks_p) + ", worst pmf normalization error " + fmt("%.1e", worst_norm) +
                            ", posterior mean error " + fmt("%.2f%%", 100.0 * recovery)});
  }

  {
    const fs::path a = out / "rerun_a", b = out / "rerun_b";
    fs::create_directories(a);
    fs::create_directories(b);
    const std::string cfg = std::string(MNB_DATA_DIR) + "/example.cfg";
    bool pass = true;
    std::string detail;
    for (const auto& dir : {a, b}) {
      const int rc = run_cli("--out-dir \"" + dir.string() + "\" simulate " + cfg + " --tag example", dir / "run.log");
      if (rc != 0) pass = false;
    }
    long files = 0;
    for (const char* f : {"example.csv", "example_reference.csv", "example_batches.csv"}) {
      const auto x = slurp(a / f), y = slurp(b / f);
      ++files;
      if (x.empty() || x != y) {
        pass = false;
        detail += std::string(f) + " differs; ";
      }
    }
    // In-process rerun of one main configuration with a different thread count.
    auto c = config_for(Sizes{std::min(z.outer, 8), std::min(z.inner, 4), z.horizon}, kPriors[0], 10, 100.0,
                        {PolicyKind::thompson_hedge, PolicyKind::hedge, PolicyKind::rexp3});
    c.threads = 1;
    std::stringstream s1, s2;
    write_summary_csv(s1, run_experiment(c));
    c.threads = 3;
    write_summary_csv(s2, run_experiment(c));
    if (s1.str() != s2.str()) {
      pass = false;
      detail += "thread-count rerun differs; ";
    }
    verdicts.push_back({9, pass, detail + std::to_string(files) + " CLI CSVs byte-identical across reruns; summary CSV identical for 1 and 3 threads"});
  }

  bool all = true;
  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& x, const Verdict& y) { return x.id < y.id; });
  for (const auto& v : verdicts) {
    all = all && v.pass;
    std::cout << "criterion " << v.id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << '\n';
  }
  return all ? 0 : 1;
}
