#pragma once

#include "netlqr/graph.hpp"

#include <compare>
#include <string>
#include <vector>

namespace netlqr {

// The information graph: nodes are the reachable sets s_k^j = {i : D^{ij} <= k},
// each with a unique descendant s_k^j -> s_{k+1}^j; chains terminate in
// self-loops. Noise entering plant node i is rooted at s_0^i.
struct InfoGraph {
  // Canonical enumeration order: smallest element, then size, then lexicographic.
  std::vector<NodeSet> nodes;
  std::vector<int> descendant;     // per info node: index of its unique descendant
  std::vector<int> root;           // per plant node (ascending id order): index of s_0^i
  std::vector<int> plant_ids;      // ascending plant node ids

  int size() const { return static_cast<int>(nodes.size()); }
  int index_of(const NodeSet& s) const;  // -1 when absent
  bool is_self_loop(int k) const { return descendant[k] == k; }
  // Info nodes r with r -> s (excluding nothing; includes s itself when s is a
  // self-loop).
  std::vector<int> predecessors(int s) const;
  // The unique plant node i with s_0^i = nodes[k], or -1 when k is nobody's root.
  int root_agent_of(int k) const;
};

InfoGraph build_info_graph(const DelayMatrix& D);

struct InfoGraphReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks: unique descendant per node, every chain reaches a self-loop in
// < |nodes| steps, and n <= |nodes| <= n^2 - n + 1.
InfoGraphReport check_properties(const InfoGraph& ig, int n);

// Tagged noise symbol w_k^i; k = -1 denotes the initial state x_0^i.
struct NoiseSymbol {
  int node = 0;
  int k = 0;
  auto operator<=>(const NoiseSymbol&) const = default;
};
std::string symbol_name(const NoiseSymbol& s);

// Sorted symbol list.
using SymbolSet = std::vector<NoiseSymbol>;

// Label sets L_t^s: which noise symbols each info node's zeta^s spans at time
// t. The sets partition {w_{-1:t-1}^i : all i}. Indexed like ig.nodes.
std::vector<SymbolSet> label_sets(const InfoGraph& ig, int t);

// Noise information sets Ihat_t^i = {w_{k-1}^j : 0 <= k <= t - D^{ij}} per
// plant node (ascending id order). Equals the union of label sets over s
// containing i.
std::vector<SymbolSet> noise_info_sets(const DelayMatrix& D, int t);

}  // namespace netlqr
