#pragma once

#include "netlqr/block.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace netlqr {

struct Edge {
  int from = 0;
  int to = 0;
  int delay = 0;
};

// Directed graph of plant nodes; each edge carries a nonnegative integer
// communication/propagation delay. Directed cycles of total delay zero are
// forbidden (they would let information loop instantaneously).
struct NetworkGraph {
  std::vector<int> nodes;
  std::vector<Edge> edges;
};

struct GraphValidation {
  bool ok = true;
  std::vector<std::string> errors;  // structural problems
  // One offending zero-delay cycle, as node ids in path order (empty if none).
  std::vector<int> zero_delay_cycle;
  std::string message() const;
};

GraphValidation validate(const NetworkGraph& g);

// Unreachable pairs; saturating in min-plus arithmetic, never a large float.
inline constexpr int kInfDelay = std::numeric_limits<int>::max();

// Saturating addition for min-plus closure.
inline int delay_add(int a, int b) {
  if (a == kInfDelay || b == kInfDelay) return kInfDelay;
  return a + b;
}

// D^{ij} = shortest aggregate delay of a directed path from j to i
// (kInfDelay when no path exists); D^{ii} = 0.
class DelayMatrix {
 public:
  DelayMatrix() = default;
  explicit DelayMatrix(std::vector<int> node_ids);

  int n() const { return static_cast<int>(ids_.size()); }
  const std::vector<int>& node_ids() const { return ids_; }
  int index_of(int id) const;

  // Accessors take node ids, not indices.
  int at(int i, int j) const { return d_[idx(i) * n() + idx(j)]; }
  void set(int i, int j, int v) { d_[idx(i) * n() + idx(j)] = v; }
  // Index-based accessor for tight loops.
  int at_index(int i, int j) const { return d_[i * n() + j]; }

  std::string to_string() const;

 private:
  int idx(int id) const { return index_of(id); }
  std::vector<int> ids_;
  std::vector<int> d_;
};

// Min-plus all-pairs shortest delay (Floyd-Warshall; n is small).
// Throws std::invalid_argument when validate(g) fails.
DelayMatrix delay_matrix(const NetworkGraph& g);

struct LQProblem;

// Replaces every edge of delay d >= 2 by a chain of d-1 relay nodes joined by
// delay-1 links. Relays copy the upstream node's state one step later, carry
// no noise and no cost, and get a 1-dim dummy input (R diagonal =
// relay_input_weight, B column zero) so every node keeps R positive definite.
// The optimal cost and all non-relay trajectories are unchanged.
std::pair<NetworkGraph, LQProblem> expand_relays(const NetworkGraph& g,
                                                 const LQProblem& p,
                                                 double relay_input_weight = 1.0);

}  // namespace netlqr
