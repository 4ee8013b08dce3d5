#include "netlqr/problem.hpp"

#include <algorithm>
#include <stdexcept>

namespace netlqr {

namespace {

// Inserts zero rows/cols for the new trailing nodes of `bigger` and copies the
// original blocks. `old_idx` maps original stacked indices into the new layout.
Eigen::MatrixXd grow(const Eigen::MatrixXd& m, int new_rows, int new_cols,
                     const std::vector<int>& row_map,
                     const std::vector<int>& col_map) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(new_rows, new_cols);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(row_map[i], col_map[j]) = m(i, j);
  return out;
}

std::vector<int> index_map(const BlockPartition& old_p, const BlockPartition& new_p,
                           Axis a) {
  std::vector<int> map(old_p.total_dim(a));
  for (int id : old_p.node_ids()) {
    int from = old_p.offset(a, id);
    int to = new_p.offset(a, id);
    for (int k = 0; k < old_p.dim(a, id); ++k) map[from + k] = to + k;
  }
  return map;
}

}  // namespace

std::pair<NetworkGraph, LQProblem> expand_relays(const NetworkGraph& g,
                                                 const LQProblem& p,
                                                 double relay_input_weight) {
  for (const auto& e : g.edges)
    if (e.delay < 0)
      throw std::invalid_argument("expand_relays: negative delay on edge " +
                                  std::to_string(e.from) + "->" +
                                  std::to_string(e.to));
  if (relay_input_weight <= 0.0)
    throw std::invalid_argument("expand_relays: relay input weight must be > 0");
  bool any = std::any_of(g.edges.begin(), g.edges.end(),
                         [](const Edge& e) { return e.delay >= 2; });
  if (!any) return {g, p};

  NetworkGraph g2;
  g2.nodes = g.nodes;
  int next_id = *std::max_element(g.nodes.begin(), g.nodes.end()) + 1;

  // New partition: original nodes plus relay nodes; a relay mirrors the
  // upstream node's state and carries a 1-dim dummy input. Relay ids are
  // assigned above every existing id, keeping the partition order ascending.
  std::vector<int> ids = p.partition.node_ids();
  std::vector<int> sdims, idims;
  for (int id : ids) {
    sdims.push_back(p.partition.dim(Axis::State, id));
    idims.push_back(p.partition.dim(Axis::Input, id));
  }
  struct RelayChain {
    int upstream;
    std::vector<int> relays;
  };
  std::vector<RelayChain> chains;
  for (const auto& e : g.edges) {
    if (e.delay <= 1) {
      g2.edges.push_back(e);
      continue;
    }
    RelayChain chain{e.from, {}};
    int prev = e.from;
    for (int k = 0; k < e.delay - 1; ++k) {
      int rid = next_id++;
      chain.relays.push_back(rid);
      ids.push_back(rid);
      sdims.push_back(p.partition.dim(Axis::State, e.from));
      idims.push_back(1);
      g2.nodes.push_back(rid);
      g2.edges.push_back({prev, rid, 1});
      prev = rid;
    }
    g2.edges.push_back({prev, e.to, 1});
    chains.push_back(std::move(chain));
  }
  BlockPartition part2(ids, sdims, idims);

  LQProblem p2;
  p2.graph = g2;
  p2.partition = part2;
  p2.horizon = p.horizon;
  p2.time_invariant = p.time_invariant;
  auto smap = index_map(p.partition, part2, Axis::State);
  auto imap = index_map(p.partition, part2, Axis::Input);
  const int N2 = part2.total_dim(Axis::State);
  const int M2 = part2.total_dim(Axis::Input);
  for (int t = 0; t < p.horizon; ++t) {
    BlockMatrix A2(part2, Axis::State, Axis::State,
                   grow(p.A[t].m, N2, N2, smap, smap));
    // Relay dynamics: first relay copies the upstream state, later relays copy
    // their predecessor; everything else stays zero (no dynamic coupling).
    for (const auto& chain : chains) {
      int prev = chain.upstream;
      for (int rid : chain.relays) {
        A2.block(rid, prev).setIdentity();
        prev = rid;
      }
    }
    p2.A.push_back(std::move(A2));
    p2.B.emplace_back(part2, Axis::State, Axis::Input,
                      grow(p.B[t].m, N2, M2, smap, imap));
    p2.Q.emplace_back(part2, Axis::State, Axis::State,
                      grow(p.Q[t].m, N2, N2, smap, smap));
    p2.S.emplace_back(part2, Axis::State, Axis::Input,
                      grow(p.S[t].m, N2, M2, smap, imap));
    BlockMatrix R2(part2, Axis::Input, Axis::Input,
                   grow(p.R[t].m, M2, M2, imap, imap));
    for (const auto& chain : chains)
      for (int rid : chain.relays)
        R2.block(rid, rid).setConstant(relay_input_weight);
    p2.R.push_back(std::move(R2));
  }
  p2.Qf = BlockMatrix(part2, Axis::State, Axis::State,
                      grow(p.Qf.m, N2, N2, smap, smap));
  p2.W.resize(p.horizon);
  for (int t = 0; t < p.horizon; ++t) {
    for (int k = 0; k < part2.node_count(); ++k) {
      int id = part2.node_ids()[k];
      int nd = part2.dim_at(Axis::State, k);
      if (p.partition.has_node(id))
        p2.W[t].push_back(p.W[t][p.partition.index_of(id)]);
      else
        p2.W[t].push_back(Eigen::MatrixXd::Zero(nd, nd));
    }
  }
  for (int k = 0; k < part2.node_count(); ++k) {
    int id = part2.node_ids()[k];
    int nd = part2.dim_at(Axis::State, k);
    if (p.partition.has_node(id))
      p2.Sigma0.push_back(p.Sigma0[p.partition.index_of(id)]);
    else
      p2.Sigma0.push_back(Eigen::MatrixXd::Zero(nd, nd));
  }
  return {std::move(g2), std::move(p2)};
}

}  // namespace netlqr
