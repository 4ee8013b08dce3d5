#include "netlqr/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace netlqr {

std::string GraphValidation::message() const {
  if (ok) return "ok";
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "; ";
    out += e;
  }
  if (!zero_delay_cycle.empty()) {
    if (!out.empty()) out += "; ";
    out += "zero-delay cycle:";
    for (int id : zero_delay_cycle) out += " " + std::to_string(id);
  }
  return out;
}

namespace {

// DFS for a cycle in the zero-delay subgraph; returns it in path order.
std::vector<int> find_zero_delay_cycle(const std::vector<int>& nodes,
                                       const std::vector<Edge>& edges) {
  std::map<int, std::vector<int>> adj;
  for (const auto& e : edges)
    if (e.delay == 0) adj[e.from].push_back(e.to);
  std::map<int, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::vector<int> stack;
  std::vector<int> cycle;
  auto dfs = [&](auto&& self, int v) -> bool {
    state[v] = 1;
    stack.push_back(v);
    for (int w : adj[v]) {
      if (state[w] == 1) {
        auto it = std::find(stack.begin(), stack.end(), w);
        cycle.assign(it, stack.end());
        return true;
      }
      if (state[w] == 0 && self(self, w)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (int v : nodes)
    if (state[v] == 0 && dfs(dfs, v)) return cycle;
  return {};
}

}  // namespace

GraphValidation validate(const NetworkGraph& g) {
  GraphValidation r;
  std::set<int> ids(g.nodes.begin(), g.nodes.end());
  if (ids.size() != g.nodes.size()) {
    r.errors.push_back("duplicate node ids");
  }
  if (g.nodes.empty()) r.errors.push_back("graph has no nodes");
  for (int id : g.nodes)
    if (id < 0) r.errors.push_back("negative node id " + std::to_string(id));
  std::set<std::pair<int, int>> seen;
  for (const auto& e : g.edges) {
    if (!ids.count(e.from) || !ids.count(e.to)) {
      r.errors.push_back("edge " + std::to_string(e.from) + "->" +
                         std::to_string(e.to) + " references unknown node");
      continue;
    }
    if (e.from == e.to)
      r.errors.push_back("self-edge at node " + std::to_string(e.from));
    if (e.delay < 0)
      r.errors.push_back("negative delay on edge " + std::to_string(e.from) +
                         "->" + std::to_string(e.to));
    if (!seen.insert({e.from, e.to}).second)
      r.errors.push_back("duplicate edge " + std::to_string(e.from) + "->" +
                         std::to_string(e.to));
  }
  if (r.errors.empty())
    r.zero_delay_cycle = find_zero_delay_cycle(g.nodes, g.edges);
  r.ok = r.errors.empty() && r.zero_delay_cycle.empty();
  return r;
}

DelayMatrix::DelayMatrix(std::vector<int> node_ids) : ids_(std::move(node_ids)) {
  if (!std::is_sorted(ids_.begin(), ids_.end()))
    std::sort(ids_.begin(), ids_.end());
  d_.assign(static_cast<std::size_t>(n()) * n(), kInfDelay);
  for (int i = 0; i < n(); ++i) d_[i * n() + i] = 0;
}

int DelayMatrix::index_of(int id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id)
    throw std::invalid_argument("delay matrix: unknown node id " +
                                std::to_string(id));
  return static_cast<int>(it - ids_.begin());
}

std::string DelayMatrix::to_string() const {
  std::string out;
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < n(); ++j) {
      int v = at_index(i, j);
      out += (v == kInfDelay ? std::string("inf") : std::to_string(v));
      out += (j + 1 < n() ? " " : "\n");
    }
  }
  return out;
}

DelayMatrix delay_matrix(const NetworkGraph& g) {
  auto v = validate(g);
  if (!v.ok) throw std::invalid_argument("invalid graph: " + v.message());
  DelayMatrix d(g.nodes);
  // Edge (from -> to) lets information flow from `from` to `to`:
  // D^{to,from} starts at the edge delay.
  for (const auto& e : g.edges) {
    if (e.delay < d.at(e.to, e.from)) d.set(e.to, e.from, e.delay);
  }
  const int n = d.n();
  const auto& ids = d.node_ids();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        int via = delay_add(d.at(ids[i], ids[k]), d.at(ids[k], ids[j]));
        if (via < d.at(ids[i], ids[j])) d.set(ids[i], ids[j], via);
      }
  return d;
}

}  // namespace netlqr
