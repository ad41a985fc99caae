#pragma once

// Random small connected grids for solver cross-checks.

#include <random>
#include <set>
#include <utility>

#include "mnb/grid.hpp"
#include "mnb/random.hpp"

namespace testgrid {

struct Instance {
  mnb::grid::GridModel grid;
  mnb::grid::GridState state;
};

inline Instance random_instance(mnb::Rng& rng, int max_nodes = 6, int max_sources = 3) {
  using namespace mnb::grid;
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  Instance inst;
  auto& g = inst.grid;
  const int n = pick(2, max_nodes);
  for (int i = 0; i < n; ++i) g.node_names.push_back("n" + std::to_string(i + 1));
  std::set<std::pair<int, int>> edges;
  auto add_edge = [&](int a, int b) {
    edges.insert({std::min(a, b), std::max(a, b)});
    g.feeders.push_back(Feeder{a, b, u(5.0, 20.0), u(1.0, 10.0), u(0.001, 0.01)});
  };
  for (int i = 1; i < n; ++i) add_edge(pick(0, i - 1), i);
  if (n >= 3 && pick(0, 1) == 1) {
    for (int tries = 0; tries < 20; ++tries) {
      const int a = pick(0, n - 1), b = pick(0, n - 1);
      if (a != b && !edges.count({std::min(a, b), std::max(a, b)})) {
        add_edge(a, b);
        break;
      }
    }
  }
  g.voltage_kv = 10.0;
  g.penalty_cost = u(0.5, 2.0);
  g.ess_capacity_kwh = u(10.0, 100.0);
  g.step_hours = 0.25;

  const int s = pick(1, max_sources);
  std::set<std::pair<int, int>> used;
  while (static_cast<int>(g.sources.size()) < s) {
    const int node = pick(0, n - 1), type = pick(0, 4);
    if (!used.insert({node, type}).second) continue;
    g.sources.push_back(Source{node, static_cast<SourceType>(type), u(20.0, 120.0), u(0.0, 0.2)});
  }
  validate(g);

  auto& st = inst.state;
  st.price = u(0.0, 0.15);
  for (int i = 0; i < n; ++i) {
    st.load_kw.push_back(u(0.0, 60.0));
    st.ess_soc.push_back(u(0.0, 1.0));
  }
  for (const auto& src : g.sources)
    st.available_kw.push_back(src.type == SourceType::ess ? 0.0 : u(0.0, src.rated_kw));
  return inst;
}

}  // namespace testgrid
