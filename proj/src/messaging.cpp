#include "netlqr/messaging.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace netlqr {

namespace {

// Copies of the same zeta arriving over different routes are produced by the
// identical update arithmetic, so they agree to roundoff; a larger gap means
// a broken plan.
void check_consistent(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      const char* what, int s, int receiver) {
  const double diff = (a - b).lpNorm<Eigen::Infinity>();
  const double scale =
      1.0 + std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
  if (diff > 1e-9 * scale) {
    std::ostringstream os;
    os << what << " at node " << receiver << ": two copies of zeta for info node "
       << s << " differ by " << diff;
    throw std::logic_error(os.str());
  }
}

}  // namespace

std::vector<int> schedule(const NetworkGraph& g) {
  std::map<int, int> indeg;
  std::map<int, std::vector<int>> out;
  for (int v : g.nodes) indeg[v] = 0;
  for (const Edge& e : g.edges) {
    if (e.delay != 0) continue;
    out[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (const auto& [v, deg] : indeg)
    if (deg == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(g.nodes.size());
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : out[v])
      if (--indeg[w] == 0) ready.push(w);
  }
  if (order.size() != g.nodes.size())
    throw std::invalid_argument("delay-0 subgraph has a cycle");
  return order;
}

MessagePlan build_plan(const NetworkGraph& g, const InfoGraph& ig) {
  MessagePlan plan;
  plan.edge_payloads.resize(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const Edge& ed = g.edges[e];
    if (ed.delay != 0 && ed.delay != 1)
      throw std::invalid_argument(
          "message plans need every edge delay in {0,1}; expand relays first");
    for (int s = 0; s < ig.size(); ++s) {
      const bool from_in = set_contains(ig.nodes[s], ed.from);
      const bool to_in = set_contains(ig.nodes[s], ed.to);
      if (ed.delay == 0 ? (from_in && to_in) : (from_in && !to_in))
        plan.edge_payloads[e].push_back(s);
    }
  }

  const int n = static_cast<int>(ig.plant_ids.size());
  plan.stored.resize(n);
  plan.used.resize(n);
  for (int a = 0; a < n; ++a) {
    const int i = ig.plant_ids[a];
    for (int s = 0; s < ig.size(); ++s) {
      if (!set_contains(ig.nodes[s], i)) continue;
      bool fresh = false;  // redelivered by a delay-0 edge every step
      for (const Edge& ed : g.edges) {
        if (ed.delay == 0 && ed.to == i && set_contains(ig.nodes[s], ed.from)) {
          fresh = true;
          break;
        }
      }
      if (!fresh) plan.stored[a].push_back(s);
    }
    // used(i): the stored entries some local update reads next step. Every
    // stored set is recomputed locally; the own root only needs the update
    // recursion for its foreign blocks, so a singleton root reads nothing.
    std::set<int> needed;
    const int rt = ig.root[a];
    for (int s : plan.stored[a]) {
      if (s == rt && ig.nodes[s].size() == 1) continue;
      for (int r : ig.predecessors(s)) needed.insert(r);
    }
    for (int s : plan.stored[a])
      if (needed.count(s)) plan.used[a].push_back(s);
  }

  plan.schedule_order = schedule(g);
  return plan;
}

DistributedRun run_distributed(const LQProblem& p, const InfoGraph& ig,
                               const GainSchedule& ks, const MessagePlan& plan,
                               const Disturbances& d) {
  if (plan.edge_payloads.size() != p.graph.edges.size())
    throw std::logic_error("message plan does not match the graph");
  const ControllerRealization cr = realize(p, ig, ks);
  const BlockPartition& part = p.partition;
  const int T = p.horizon;
  const int n = static_cast<int>(ig.plant_ids.size());
  const int m = ig.size();

  DistributedRun run;
  run.trajectory.x.assign(T + 1, Eigen::VectorXd());
  run.trajectory.u.assign(T, Eigen::VectorXd::Zero(p.input_dim()));
  run.trajectory.zeta.assign(T + 1, std::vector<Eigen::VectorXd>(m));
  run.trajectory.x[0] = d.x0;

  struct MemEntry {
    Eigen::VectorXd v;
    bool read = false;
  };
  std::vector<std::map<int, MemEntry>> memory(n);
  std::vector<std::map<int, Eigen::VectorXd>> inbox1(n), inbox1_next(n);
  std::vector<std::map<int, Eigen::VectorXd>> znow(n);
  std::vector<std::set<int>> received(n);
  // Step t-1 values of every zeta, kept outside the agents purely as the
  // instrumentation fallback (out_of_span_reads counts how often it is hit;
  // a sound plan never touches it) and for the trajectory record.
  std::vector<Eigen::VectorXd> prev_global(m);

  for (int t = 0; t < T; ++t) {
    for (int a = 0; a < n; ++a) {
      znow[a].clear();
      received[a].clear();
    }

    for (int i : plan.schedule_order) {
      const int a = part.index_of(i);
      const Eigen::VectorXd xi = run.trajectory.x[t].segment(
          part.offset(Axis::State, i), part.dim(Axis::State, i));

      // Previous-step zeta lookup against the local span: own memory for
      // sets containing i, the delay-1 inbox for the rest.
      auto prev_of = [&](int r) -> const Eigen::VectorXd& {
        ++run.reads;
        if (set_contains(ig.nodes[r], i)) {
          if (auto it = memory[a].find(r); it != memory[a].end()) {
            it->second.read = true;
            return it->second.v;
          }
        } else if (auto it = inbox1[a].find(r); it != inbox1[a].end()) {
          return it->second;
        }
        ++run.out_of_span_reads;
        if (prev_global[r].size() == 0)
          throw std::logic_error("previous-step zeta unavailable everywhere");
        return prev_global[r];
      };
      auto updated = [&](int s) {
        Eigen::VectorXd v =
            Eigen::VectorXd::Zero(part.subset_dim(Axis::State, ig.nodes[s]));
        if (t > 0)
          for (const auto& term : cr.updates[t - 1][s]) v += term.M * prev_of(term.r);
        return v;
      };

      const int rt = ig.root[a];
      if (received[a].count(rt))
        throw std::logic_error("agent received its own root injection");
      for (int s = 0; s < m; ++s) {
        if (s == rt || !set_contains(ig.nodes[s], i) || received[a].count(s))
          continue;
        // Another agent's root carries that agent's fresh measurement, which
        // no recursion can reproduce; it must have arrived by delay-0 relay.
        if (ig.root_agent_of(s) != -1)
          throw std::logic_error("missing delay-0 delivery of a root info node");
        znow[a][s] = updated(s);
      }
      // Own root: foreign blocks follow the update recursion; the own block
      // comes from the measurement, which is what injects the fresh noise.
      Eigen::VectorXd zr =
          ig.nodes[rt].size() > 1
              ? updated(rt)
              : Eigen::VectorXd::Zero(part.subset_dim(Axis::State, ig.nodes[rt]));
      Eigen::VectorXd own = xi;
      for (int s = 0; s < m; ++s) {
        if (s == rt || !set_contains(ig.nodes[s], i)) continue;
        own -= znow[a][s].segment(
            part.offset_in_subset(Axis::State, ig.nodes[s], i),
            part.dim(Axis::State, i));
      }
      zr.segment(part.offset_in_subset(Axis::State, ig.nodes[rt], i),
                 part.dim(Axis::State, i)) = own;
      znow[a][rt] = std::move(zr);

      Eigen::VectorXd ui = Eigen::VectorXd::Zero(part.dim(Axis::Input, i));
      for (int s = 0; s < m; ++s) {
        if (!set_contains(ig.nodes[s], i)) continue;
        const Eigen::VectorXd us = cr.K[t][s] * znow[a][s];
        ui += us.segment(part.offset_in_subset(Axis::Input, ig.nodes[s], i),
                         part.dim(Axis::Input, i));
      }
      run.trajectory.u[t].segment(part.offset(Axis::Input, i),
                                  part.dim(Axis::Input, i)) = ui;

      // Delay-0 messages; the schedule guarantees every receiver runs later
      // within this step.
      for (std::size_t e = 0; e < p.graph.edges.size(); ++e) {
        const Edge& ed = p.graph.edges[e];
        if (ed.from != i || ed.delay != 0 || plan.edge_payloads[e].empty())
          continue;
        const int b = part.index_of(ed.to);
        TraceEvent ev{t, ed.from, ed.to, 0, {}, {}};
        for (int s : plan.edge_payloads[e]) {
          const Eigen::VectorXd& v = znow[a].at(s);
          if (auto it = znow[b].find(s); it != znow[b].end()) {
            check_consistent(it->second, v, "delay-0 duplicate", s, ed.to);
          } else {
            znow[b][s] = v;
            received[b].insert(s);
          }
          ev.tags.push_back(s);
          ev.norms.push_back(v.norm());
        }
        run.trace.push_back(std::move(ev));
      }
    }

    for (int s = 0; s < m; ++s) {
      prev_global[s] = znow[part.index_of(ig.nodes[s].front())].at(s);
      run.trajectory.zeta[t][s] = prev_global[s];
    }

    run.trajectory.x[t + 1] = p.A[t].m * run.trajectory.x[t] +
                              p.B[t].m * run.trajectory.u[t] + d.w[t];

    // Delay-1 messages, read during step t+1.
    if (t + 1 < T) {
      for (std::size_t e = 0; e < p.graph.edges.size(); ++e) {
        const Edge& ed = p.graph.edges[e];
        if (ed.delay != 1 || plan.edge_payloads[e].empty()) continue;
        const int a = part.index_of(ed.from);
        const int b = part.index_of(ed.to);
        TraceEvent ev{t, ed.from, ed.to, 1, {}, {}};
        for (int s : plan.edge_payloads[e]) {
          const Eigen::VectorXd& v = znow[a].at(s);
          if (auto it = inbox1_next[b].find(s); it != inbox1_next[b].end())
            check_consistent(it->second, v, "delay-1 duplicate", s, ed.to);
          else
            inbox1_next[b][s] = v;
          ev.tags.push_back(s);
          ev.norms.push_back(v.norm());
        }
        run.trace.push_back(std::move(ev));
      }
    }

    // Memory turnover: retire the round that just became stale into the
    // statistics, then store what the plan keeps for step t+1.
    for (int a = 0; a < n; ++a) {
      for (const auto& [s, entry] : memory[a]) {
        ++run.stored_entries;
        if (entry.read) ++run.read_entries;
      }
      memory[a].clear();
      if (t + 1 < T) {
        int scalars = 0;
        for (int s : plan.stored[a]) {
          const Eigen::VectorXd& v = znow[a].at(s);
          scalars += static_cast<int>(v.size());
          memory[a].emplace(s, MemEntry{v, false});
        }
        run.max_memory_scalars = std::max(run.max_memory_scalars, scalars);
      }
      inbox1[a] = std::move(inbox1_next[a]);
      inbox1_next[a].clear();
    }
  }

  // Final-step zeta, advanced outside the protocol so the record has the
  // same shape as the centralized simulation.
  {
    std::vector<Eigen::VectorXd>& zT = run.trajectory.zeta[T];
    for (int s = 0; s < m; ++s) {
      Eigen::VectorXd v =
          Eigen::VectorXd::Zero(part.subset_dim(Axis::State, ig.nodes[s]));
      for (const auto& term : cr.updates[T - 1][s])
        v += term.M * run.trajectory.zeta[T - 1][term.r];
      zT[s] = std::move(v);
    }
    for (int a = 0; a < n; ++a) {
      const int i = ig.plant_ids[a];
      const int rt = ig.root[a];
      zT[rt].segment(part.offset_in_subset(Axis::State, ig.nodes[rt], i),
                     part.dim(Axis::State, i)) +=
          d.w[T - 1].segment(part.offset(Axis::State, i),
                             part.dim(Axis::State, i));
    }
  }

  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd& x = run.trajectory.x[t];
    const Eigen::VectorXd& u = run.trajectory.u[t];
    run.trajectory.stage_costs.push_back(x.dot(p.Q[t].m * x) +
                                         2.0 * x.dot(p.S[t].m * u) +
                                         u.dot(p.R[t].m * u));
  }
  run.trajectory.stage_costs.push_back(
      run.trajectory.x[T].dot(p.Qf.m * run.trajectory.x[T]));

  run.unread_fraction =
      run.stored_entries == 0
          ? 0.0
          : 1.0 - static_cast<double>(run.read_entries) /
                      static_cast<double>(run.stored_entries);
  return run;
}

}  // namespace netlqr
