#pragma once

// Distributed generation system: topology, sources, per-step operating state,
// and the CSV formats they are read from.
//
// Topology file, one section per tag, each followed by a header row:
//   [nodes]    node_id,name
//   [feeders]  from,to,susceptance,ampacity,feeder_cost
//   [sources]  node_id,type,rated_kw,variable_cost
//   [scalars]  key,value      (voltage_kv, penalty_cost, ess_capacity_kwh, step_hours)
//
// Time-series file:
//   timestamp,node,load_kw,avail_<type>...,price,ess_soc
// one row per (timestamp, node); one avail_<type> column for every non-storage
// source type present in the topology.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mnb/error.hpp"
#include "mnb/random.hpp"

namespace mnb::grid {

enum class SourceType { gas, biomass, wind, pv, ess };

inline const char* to_string(SourceType t) {
  switch (t) {
    case SourceType::gas: return "gas";
    case SourceType::biomass: return "biomass";
    case SourceType::wind: return "wind";
    case SourceType::pv: return "pv";
    case SourceType::ess: return "ess";
  }
  return "?";
}

inline std::optional<SourceType> parse_source_type(const std::string& s) {
  for (auto t : {SourceType::gas, SourceType::biomass, SourceType::wind, SourceType::pv, SourceType::ess})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

struct Source {
  int node = 0;  // 0-based
  SourceType type = SourceType::gas;
  double rated_kw = 0.0;
  double variable_cost = 0.0;  // per kWh
};

struct Feeder {
  int from = 0;  // 0-based
  int to = 0;
  double susceptance = 1.0;
  double ampacity = 1.0;
  double feeder_cost = 0.0;
};

struct GridModel {
  std::vector<std::string> node_names;
  std::vector<Feeder> feeders;
  std::vector<Source> sources;
  double voltage_kv = 1.0;
  double penalty_cost = 1.0;
  double ess_capacity_kwh = 0.0;
  double step_hours = 0.25;

  int n_nodes() const noexcept { return static_cast<int>(node_names.size()); }

  /// Line limit V * A for a feeder.
  double line_capacity(const Feeder& f) const { return voltage_kv * f.ampacity; }
};

/// Operating snapshot for one step.
struct GridState {
  std::vector<double> load_kw;       // per node
  std::vector<double> available_kw;  // per source (storage entries unused)
  double price = 0.0;                // energy price Ep
  std::vector<double> ess_soc;       // per node, in [0, 1]
};

/// Connected components of the feeder graph restricted to `alive` feeders.
inline std::vector<int> components(int n_nodes, const std::vector<Feeder>& feeders,
                                   const std::vector<char>& alive) {
  std::vector<int> parent(n_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (std::size_t e = 0; e < feeders.size(); ++e) {
    if (!alive[e]) continue;
    const int a = find(feeders[e].from), b = find(feeders[e].to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> comp(n_nodes);
  for (int i = 0; i < n_nodes; ++i) comp[i] = find(i);
  return comp;
}

inline void validate(const GridModel& g) {
  const int n = g.n_nodes();
  if (n < 2) fail(ErrorKind::validation, "grid needs at least 2 nodes");
  for (std::size_t e = 0; e < g.feeders.size(); ++e) {
    const auto& f = g.feeders[e];
    const std::string where = "feeder " + std::to_string(e + 1);
    if (f.from < 0 || f.from >= n || f.to < 0 || f.to >= n || f.from == f.to)
      fail(ErrorKind::validation, where + ": endpoints must be two distinct known nodes");
    if (!(f.susceptance > 0.0)) fail(ErrorKind::validation, where + ": susceptance must be > 0");
    if (!(f.ampacity > 0.0)) fail(ErrorKind::validation, where + ": ampacity must be > 0");
    if (!(f.feeder_cost >= 0.0)) fail(ErrorKind::validation, where + ": feeder cost must be >= 0");
  }
  std::set<std::pair<int, SourceType>> seen;
  for (std::size_t s = 0; s < g.sources.size(); ++s) {
    const auto& src = g.sources[s];
    const std::string where = "source " + std::to_string(s + 1);
    if (src.node < 0 || src.node >= n) fail(ErrorKind::validation, where + ": unknown node");
    if (!(src.rated_kw >= 0.0)) fail(ErrorKind::validation, where + ": rated power must be >= 0");
    if (!(src.variable_cost >= 0.0)) fail(ErrorKind::validation, where + ": variable cost must be >= 0");
    if (!seen.insert({src.node, src.type}).second)
      fail(ErrorKind::validation, where + ": duplicate source type at one node");
  }
  if (!(g.voltage_kv > 0.0)) fail(ErrorKind::validation, "voltage_kv must be > 0");
  if (!(g.penalty_cost >= 0.0)) fail(ErrorKind::validation, "penalty_cost must be >= 0");
  if (!(g.ess_capacity_kwh >= 0.0)) fail(ErrorKind::validation, "ess_capacity_kwh must be >= 0");
  if (!(g.step_hours > 0.0)) fail(ErrorKind::validation, "step_hours must be > 0");
  const auto comp = components(n, g.feeders, std::vector<char>(g.feeders.size(), 1));
  for (int i = 0; i < n; ++i)
    if (comp[i] != comp[0]) fail(ErrorKind::validation, "feeder graph is disconnected (node " + std::to_string(i + 1) + ")");
}

inline void validate(const GridState& s, const GridModel& g) {
  const int n = g.n_nodes();
  if (static_cast<int>(s.load_kw.size()) != n || static_cast<int>(s.ess_soc.size()) != n ||
      s.available_kw.size() != g.sources.size())
    fail(ErrorKind::validation, "grid state dimensions do not match the grid model");
  for (int i = 0; i < n; ++i) {
    if (!(s.load_kw[i] >= 0.0)) fail(ErrorKind::validation, "negative load at node " + std::to_string(i + 1));
    if (!(s.ess_soc[i] >= 0.0 && s.ess_soc[i] <= 1.0))
      fail(ErrorKind::validation, "ess_soc outside [0, 1] at node " + std::to_string(i + 1));
  }
  for (std::size_t k = 0; k < g.sources.size(); ++k) {
    if (g.sources[k].type == SourceType::ess) continue;
    const double a = s.available_kw[k];
    if (!(a >= 0.0 && a <= g.sources[k].rated_kw * (1.0 + 1e-12)))
      fail(ErrorKind::validation, "availability outside [0, rated] for source " + std::to_string(k + 1));
  }
  if (!std::isfinite(s.price)) fail(ErrorKind::validation, "energy price must be finite");
}

namespace detail {

inline std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c); };
  while (!s.empty() && issp(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(s[i])) ++i;
  return s.substr(i);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_number(const std::string& cell, const std::string& ctx) {
  try {
    std::size_t used = 0;
    const double x = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return x;
  } catch (const std::logic_error&) {
    fail(ErrorKind::parse, ctx + ": bad number '" + cell + "'");
  }
}

// Column lookup for a header row; missing columns are reported by name.
class Header {
 public:
  Header(std::vector<std::string> names, std::string ctx) : names_(std::move(names)), ctx_(std::move(ctx)) {}

  std::size_t index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) fail(ErrorKind::parse, ctx_ + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - names_.begin());
  }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::string ctx_;
};

}  // namespace detail

inline GridModel load_grid(std::istream& is) {
  GridModel g;
  std::string line, section;
  std::optional<detail::Header> header;
  std::map<long, int> node_index;  // file node id -> 0-based
  struct PendingFeeder { long from, to; Feeder f; long line; };
  struct PendingSource { long node; Source s; long line; };
  std::vector<PendingFeeder> feeders;
  std::vector<PendingSource> sources;
  std::set<std::string> scalars_seen;
  long line_no = 0;

  auto ctx = [&] { return "topology line " + std::to_string(line_no); };
  while (std::getline(is, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::parse, ctx() + ": unterminated section tag");
      section = line.substr(1, line.size() - 2);
      if (section != "nodes" && section != "feeders" && section != "sources" && section != "scalars")
        fail(ErrorKind::parse, ctx() + ": unknown section '" + section + "'");
      header.reset();
      continue;
    }
    if (section.empty()) fail(ErrorKind::parse, ctx() + ": data before any section tag");
    auto cells = detail::split_csv(line);
    if (!header) {
      header.emplace(cells, ctx() + " [" + section + "]");
      if (section == "nodes") { header->index("node_id"); header->index("name"); }
      if (section == "feeders")
        for (auto c : {"from", "to", "susceptance", "ampacity", "feeder_cost"}) header->index(c);
      if (section == "sources")
        for (auto c : {"node_id", "type", "rated_kw", "variable_cost"}) header->index(c);
      if (section == "scalars") { header->index("key"); header->index("value"); }
      continue;
    }
    if (cells.size() != header->size())
      fail(ErrorKind::parse, ctx() + ": expected " + std::to_string(header->size()) + " fields");
    const auto& h = *header;
    if (section == "nodes") {
      const long id = static_cast<long>(detail::to_number(cells[h.index("node_id")], ctx()));
      if (!node_index.emplace(id, g.n_nodes()).second) fail(ErrorKind::parse, ctx() + ": duplicate node id");
      g.node_names.push_back(cells[h.index("name")]);
    } else if (section == "feeders") {
      Feeder f;
      f.susceptance = detail::to_number(cells[h.index("susceptance")], ctx());
      f.ampacity = detail::to_number(cells[h.index("ampacity")], ctx());
      f.feeder_cost = detail::to_number(cells[h.index("feeder_cost")], ctx());
      feeders.push_back({static_cast<long>(detail::to_number(cells[h.index("from")], ctx())),
                         static_cast<long>(detail::to_number(cells[h.index("to")], ctx())), f, line_no});
    } else if (section == "sources") {
      Source s;
      auto type = parse_source_type(cells[h.index("type")]);
      if (!type) fail(ErrorKind::parse, ctx() + ": unknown source type '" + cells[h.index("type")] + "'");
      s.type = *type;
      s.rated_kw = detail::to_number(cells[h.index("rated_kw")], ctx());
      s.variable_cost = detail::to_number(cells[h.index("variable_cost")], ctx());
      sources.push_back({static_cast<long>(detail::to_number(cells[h.index("node_id")], ctx())), s, line_no});
    } else {
      const std::string key = cells[h.index("key")];
      const double value = detail::to_number(cells[h.index("value")], ctx());
      if (key == "voltage_kv") g.voltage_kv = value;
      else if (key == "penalty_cost") g.penalty_cost = value;
      else if (key == "ess_capacity_kwh") g.ess_capacity_kwh = value;
      else if (key == "step_hours") g.step_hours = value;
      else fail(ErrorKind::parse, ctx() + ": unknown scalar '" + key + "'");
      scalars_seen.insert(key);
    }
  }
  for (auto key : {"voltage_kv", "penalty_cost", "ess_capacity_kwh", "step_hours"})
    if (!scalars_seen.count(key)) fail(ErrorKind::parse, std::string("topology: missing scalar '") + key + "'");

  auto resolve = [&](long id, long at) {
    auto it = node_index.find(id);
    if (it == node_index.end())
      fail(ErrorKind::parse, "topology line " + std::to_string(at) + ": unknown node id " + std::to_string(id));
    return it->second;
  };
  for (auto& p : feeders) {
    p.f.from = resolve(p.from, p.line);
    p.f.to = resolve(p.to, p.line);
    g.feeders.push_back(p.f);
  }
  for (auto& p : sources) {
    p.s.node = resolve(p.node, p.line);
    g.sources.push_back(p.s);
  }
  validate(g);
  return g;
}

inline GridModel load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open topology file '" + path + "'");
  return load_grid(in);
}

/// Non-storage source types present in the grid, in enum order.
inline std::vector<SourceType> availability_types(const GridModel& g) {
  std::vector<SourceType> out;
  for (auto t : {SourceType::gas, SourceType::biomass, SourceType::wind, SourceType::pv})
    for (const auto& s : g.sources)
      if (s.type == t) { out.push_back(t); break; }
  return out;
}

inline std::vector<GridState> load_states(std::istream& is, const GridModel& g) {
  const int n = g.n_nodes();
  std::string line;
  long line_no = 0;
  auto ctx = [&] { return "time-series line " + std::to_string(line_no); };
  std::optional<detail::Header> header;
  while (!header && std::getline(is, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    header.emplace(detail::split_csv(line), ctx());
  }
  if (!header) fail(ErrorKind::parse, "time-series: empty input");
  const auto& h = *header;
  const auto c_ts = h.index("timestamp"), c_node = h.index("node"), c_load = h.index("load_kw"),
             c_price = h.index("price"), c_soc = h.index("ess_soc");
  std::map<SourceType, std::size_t> c_avail;
  for (auto t : availability_types(g)) c_avail[t] = h.index(std::string("avail_") + to_string(t));

  std::vector<GridState> states;
  std::string current_ts;
  std::vector<char> filled;
  auto finish = [&] {
    if (states.empty()) return;
    for (int i = 0; i < n; ++i)
      if (!filled[i])
        fail(ErrorKind::parse, "time-series: timestamp '" + current_ts + "' lacks node " + std::to_string(i + 1));
    try {
      validate(states.back(), g);
    } catch (const Error& e) {
      fail(ErrorKind::validation, "time-series timestamp '" + current_ts + "': " + e.what());
    }
  };
  while (std::getline(is, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != h.size()) fail(ErrorKind::parse, ctx() + ": expected " + std::to_string(h.size()) + " fields");
    if (states.empty() || cells[c_ts] != current_ts) {
      finish();
      current_ts = cells[c_ts];
      GridState s;
      s.load_kw.assign(n, 0.0);
      s.ess_soc.assign(n, 0.0);
      s.available_kw.assign(g.sources.size(), 0.0);
      s.price = detail::to_number(cells[c_price], ctx());
      states.push_back(std::move(s));
      filled.assign(n, 0);
    }
    auto& s = states.back();
    const long id = static_cast<long>(detail::to_number(cells[c_node], ctx()));
    if (id < 1 || id > n) fail(ErrorKind::parse, ctx() + ": unknown node " + std::to_string(id));
    const int i = static_cast<int>(id - 1);
    if (filled[i]) fail(ErrorKind::parse, ctx() + ": node " + std::to_string(id) + " repeated within a timestamp");
    filled[i] = 1;
    s.load_kw[i] = detail::to_number(cells[c_load], ctx());
    s.ess_soc[i] = detail::to_number(cells[c_soc], ctx());
    if (detail::to_number(cells[c_price], ctx()) != s.price)
      fail(ErrorKind::parse, ctx() + ": price differs across nodes of one timestamp");
    if (s.load_kw[i] < 0.0) fail(ErrorKind::validation, ctx() + ": negative load");
    for (std::size_t k = 0; k < g.sources.size(); ++k) {
      const auto& src = g.sources[k];
      if (src.node != i || src.type == SourceType::ess) continue;
      s.available_kw[k] = detail::to_number(cells[c_avail.at(src.type)], ctx());
    }
  }
  finish();
  if (states.empty()) fail(ErrorKind::parse, "time-series: no data rows");
  return states;
}

inline std::vector<GridState> load_states_file(const std::string& path, const GridModel& g) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open time-series file '" + path + "'");
  return load_states(in, g);
}

namespace detail {

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline void write_grid(std::ostream& os, const GridModel& g) {
  os << "[nodes]\nnode_id,name\n";
  for (int i = 0; i < g.n_nodes(); ++i) os << (i + 1) << ',' << g.node_names[i] << '\n';
  os << "\n[feeders]\nfrom,to,susceptance,ampacity,feeder_cost\n";
  for (const auto& f : g.feeders)
    os << (f.from + 1) << ',' << (f.to + 1) << ',' << detail::num(f.susceptance) << ',' << detail::num(f.ampacity)
       << ',' << detail::num(f.feeder_cost) << '\n';
  os << "\n[sources]\nnode_id,type,rated_kw,variable_cost\n";
  for (const auto& s : g.sources)
    os << (s.node + 1) << ',' << to_string(s.type) << ',' << detail::num(s.rated_kw) << ','
       << detail::num(s.variable_cost) << '\n';
  os << "\n[scalars]\nkey,value\n"
     << "voltage_kv," << detail::num(g.voltage_kv) << '\n'
     << "penalty_cost," << detail::num(g.penalty_cost) << '\n'
     << "ess_capacity_kwh," << detail::num(g.ess_capacity_kwh) << '\n'
     << "step_hours," << detail::num(g.step_hours) << '\n';
}

inline void write_states(std::ostream& os, const GridModel& g, const std::vector<GridState>& states,
                         const std::vector<std::string>& timestamps) {
  const auto types = availability_types(g);
  os << "timestamp,node,load_kw";
  for (auto t : types) os << ",avail_" << to_string(t);
  os << ",price,ess_soc\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    for (int i = 0; i < g.n_nodes(); ++i) {
      os << timestamps[k] << ',' << (i + 1) << ',' << detail::num(s.load_kw[i]);
      for (auto t : types) {
        double a = 0.0;
        for (std::size_t j = 0; j < g.sources.size(); ++j)
          if (g.sources[j].node == i && g.sources[j].type == t) a = s.available_kw[j];
        os << ',' << detail::num(a);
      }
      os << ',' << detail::num(s.price) << ',' << detail::num(s.ess_soc[i]) << '\n';
    }
  }
}

/// Quarter-hour timestamps "d<day>-HH:MM" starting at day 1 00:00.
inline std::string quarter_hour_stamp(long step) {
  const long minutes = step * 15;
  char buf[32];
  std::snprintf(buf, sizeof buf, "d%ld-%02ld:%02ld", minutes / 1440 + 1, (minutes / 60) % 24, minutes % 60);
  return buf;
}

/// Synthetic operating states at 15-minute cadence: daily load and price
/// cycles with AR(1) noise, PV following daylight with cloud cover, wind as a
/// bounded AR(1) capacity factor, and a slowly cycling storage charge level.
template <class URBG>
std::vector<GridState> synthesize_states(const GridModel& g, long steps, const std::vector<double>& base_load_kw,
                                         URBG& rng) {
  const int n = g.n_nodes();
  if (static_cast<int>(base_load_kw.size()) != n)
    fail(ErrorKind::invalid_argument, "base load vector must have one entry per node");
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> load_noise(n, 0.0);
  double wind = 0.5, cloud = 0.8, price_noise = 0.0;
  std::vector<GridState> out;
  out.reserve(static_cast<std::size_t>(steps));
  const double two_pi = 2.0 * std::acos(-1.0);
  for (long k = 0; k < steps; ++k) {
    const double hour = std::fmod(k * 0.25, 24.0);
    const double daily = 1.0 + 0.25 * std::sin(two_pi * (hour - 9.0) / 24.0) + 0.1 * std::sin(two_pi * (hour - 17.0) / 12.0);
    GridState s;
    s.load_kw.resize(n);
    s.ess_soc.resize(n);
    for (int i = 0; i < n; ++i) {
      load_noise[i] = 0.9 * load_noise[i] + 0.05 * z(rng);
      s.load_kw[i] = std::max(0.0, base_load_kw[i] * (daily + load_noise[i]));
      s.ess_soc[i] = 0.5 + 0.4 * std::sin(two_pi * (hour - 3.0) / 24.0);
    }
    wind = std::clamp(0.95 * wind + 0.05 * 0.45 + 0.06 * z(rng), 0.0, 1.0);
    cloud = std::clamp(0.97 * cloud + 0.03 * 0.75 + 0.05 * z(rng), 0.1, 1.0);
    const double sun = std::max(0.0, std::sin(two_pi * (hour - 6.0) / 24.0));
    s.available_kw.resize(g.sources.size());
    for (std::size_t j = 0; j < g.sources.size(); ++j) {
      const auto& src = g.sources[j];
      double factor = 1.0;
      if (src.type == SourceType::wind) factor = wind;
      if (src.type == SourceType::pv) factor = sun * cloud;
      if (src.type == SourceType::ess) factor = 0.0;
      s.available_kw[j] = src.rated_kw * std::clamp(factor, 0.0, 1.0);
    }
    price_noise = 0.8 * price_noise + 0.004 * z(rng);
    s.price = std::max(0.0, 0.06 + 0.03 * std::sin(two_pi * (hour - 12.0) / 24.0) + price_noise);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mnb::grid
