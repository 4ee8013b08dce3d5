#include "netlqr/infograph.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace netlqr {

int InfoGraph::index_of(const NodeSet& s) const {
  for (int k = 0; k < size(); ++k)
    if (nodes[k] == s) return k;
  return -1;
}

std::vector<int> InfoGraph::predecessors(int s) const {
  std::vector<int> out;
  for (int r = 0; r < size(); ++r)
    if (descendant[r] == s) out.push_back(r);
  return out;
}

int InfoGraph::root_agent_of(int k) const {
  for (std::size_t i = 0; i < root.size(); ++i)
    if (root[i] == k) return plant_ids[i];
  return -1;
}

InfoGraph build_info_graph(const DelayMatrix& D) {
  const int n = D.n();
  const auto& ids = D.node_ids();
  InfoGraph ig;
  ig.plant_ids = ids;

  // Collect all reachable sets s_k^j; each chain stops at its fixpoint.
  std::vector<NodeSet> sets;
  std::map<NodeSet, NodeSet> desc;          // s_k^j -> s_{k+1}^j
  std::vector<NodeSet> root_sets(n);
  auto reach = [&](int j, int k) {
    NodeSet s;
    for (int i = 0; i < n; ++i)
      if (D.at_index(i, j) <= k) s.push_back(ids[i]);
    return s;
  };
  for (int j = 0; j < n; ++j) {
    NodeSet prev;
    for (int k = 0;; ++k) {
      NodeSet s = reach(j, k);
      if (k == 0) root_sets[j] = s;
      if (std::find(sets.begin(), sets.end(), s) == sets.end()) sets.push_back(s);
      if (!prev.empty() || k > 0) desc[prev] = s;
      if (k > 0 && s == prev) break;
      prev = s;
      if (k > n + 1) throw std::logic_error("reachable-set chain failed to stabilize");
    }
  }
  // Canonical order: smallest element, then size, then lexicographic.
  std::sort(sets.begin(), sets.end(), [](const NodeSet& a, const NodeSet& b) {
    if (a.front() != b.front()) return a.front() < b.front();
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  ig.nodes = sets;
  ig.descendant.resize(ig.size());
  for (int k = 0; k < ig.size(); ++k) {
    auto it = desc.find(ig.nodes[k]);
    if (it == desc.end()) throw std::logic_error("info node without descendant");
    int d = ig.index_of(it->second);
    if (d < 0) throw std::logic_error("descendant not among info nodes");
    ig.descendant[k] = d;
  }
  ig.root.resize(n);
  for (int j = 0; j < n; ++j) ig.root[j] = ig.index_of(root_sets[j]);
  return ig;
}

InfoGraphReport check_properties(const InfoGraph& ig, int n) {
  InfoGraphReport r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    r.violations.push_back(std::move(msg));
  };
  const int m = ig.size();
  if (m < n || m > n * n - n + 1)
    fail("node count " + std::to_string(m) + " outside [n, n^2-n+1] = [" +
         std::to_string(n) + ", " + std::to_string(n * n - n + 1) + "]");
  if (static_cast<int>(ig.descendant.size()) != m)
    fail("descendant map size mismatch");
  for (int k = 0; k < m; ++k) {
    if (ig.descendant[k] < 0 || ig.descendant[k] >= m) {
      fail("descendant of " + node_set_name(ig.nodes[k]) + " out of range");
      continue;
    }
    // Walk the chain; it must hit a self-loop in < m steps.
    int cur = k;
    bool hit = false;
    for (int step = 0; step < m; ++step) {
      if (ig.descendant[cur] == cur) {
        hit = true;
        break;
      }
      cur = ig.descendant[cur];
    }
    if (!hit)
      fail("chain from " + node_set_name(ig.nodes[k]) +
           " does not reach a self-loop");
  }
  for (std::size_t i = 0; i < ig.root.size(); ++i)
    if (ig.root[i] < 0 || ig.root[i] >= m)
      fail("missing root set for plant node " + std::to_string(ig.plant_ids[i]));
  return r;
}

std::string symbol_name(const NoiseSymbol& s) {
  if (s.k < 0) return "x0^" + std::to_string(s.node);
  return "w" + std::to_string(s.k) + "^" + std::to_string(s.node);
}

std::vector<SymbolSet> label_sets(const InfoGraph& ig, int t) {
  if (t < 0) throw std::invalid_argument("label_sets: t must be >= 0");
  const int m = ig.size();
  // L_0^s = {x_0^i : root(i) = s}; L_{k+1}^s = {w_k^i : root(i)=s} U union_{r->s} L_k^r.
  std::vector<SymbolSet> cur(m);
  for (std::size_t i = 0; i < ig.root.size(); ++i)
    cur[ig.root[i]].push_back({ig.plant_ids[i], -1});
  for (auto& s : cur) std::sort(s.begin(), s.end());
  for (int k = 0; k < t; ++k) {
    std::vector<SymbolSet> next(m);
    for (std::size_t i = 0; i < ig.root.size(); ++i)
      next[ig.root[i]].push_back({ig.plant_ids[i], k});
    for (int r = 0; r < m; ++r) {
      auto& dst = next[ig.descendant[r]];
      dst.insert(dst.end(), cur[r].begin(), cur[r].end());
    }
    for (auto& s : next) std::sort(s.begin(), s.end());
    cur = std::move(next);
  }
  return cur;
}

std::vector<SymbolSet> noise_info_sets(const DelayMatrix& D, int t) {
  if (t < 0) throw std::invalid_argument("noise_info_sets: t must be >= 0");
  const int n = D.n();
  const auto& ids = D.node_ids();
  std::vector<SymbolSet> out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int d = D.at_index(i, j);
      if (d == kInfDelay) continue;
      // Symbols w_{k-1}^j for 0 <= k <= t - d, with w_{-1} = x_0.
      for (int k = 0; k <= t - d; ++k) out[i].push_back({ids[j], k - 1});
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

}  // namespace netlqr
