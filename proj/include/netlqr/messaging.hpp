#pragma once

#include "netlqr/controller.hpp"

#include <string>
#include <vector>

namespace netlqr {

// Static communication plan. For each graph edge the info nodes whose zeta
// travels on it, and for each agent which zeta values it memorizes between
// steps:
//   delay-0 edge i->j carries {s : i in s and j in s}
//   delay-1 edge i->j carries {s : i in s and j not in s}
//   memory of i stores   {s : i in s, no j in s with a delay-0 edge j->i}
// `stored` is that literal rule; `used` is the subset an agent ever reads
// (the rule can memorize values no update needs; see unread_fraction).
struct MessagePlan {
  std::vector<std::vector<int>> edge_payloads;  // aligned with graph.edges
  std::vector<std::vector<int>> stored;         // per agent, partition order
  std::vector<std::vector<int>> used;           // per agent
  std::vector<int> schedule_order;              // agent ids, execution order
};

// Throws when some edge delay is outside {0,1} (expand relays first).
MessagePlan build_plan(const NetworkGraph& g, const InfoGraph& ig);

// Topological order of the delay-0 subgraph (ties broken by node id), so
// every agent's delay-0 senders run before it within a timestep.
std::vector<int> schedule(const NetworkGraph& g);

struct TraceEvent {
  int t;
  int from, to, delay;
  std::vector<int> tags;       // info-node indices carried
  std::vector<double> norms;   // payload 2-norms, same order
};

struct DistributedRun {
  Trajectory trajectory;
  std::vector<TraceEvent> trace;
  // Locality instrumentation: every previous-step zeta read is checked
  // against the span basis {x_t^i} u memory u inboxes.
  long reads = 0;
  long out_of_span_reads = 0;
  // Memory accounting for the unread fraction and the n^2 N bound.
  long stored_entries = 0;
  long read_entries = 0;
  double unread_fraction = 0.0;
  int max_memory_scalars = 0;
};

// Executes the controller as a per-agent protocol: each agent, in schedule
// order, reconstructs every zeta_t^s with i in s from its measurement x_t^i,
// its memory, and its inboxes only, then emits u_t^i and its messages.
// The resulting trajectory matches controller::simulate.
DistributedRun run_distributed(const LQProblem& p, const InfoGraph& ig,
                               const GainSchedule& ks, const MessagePlan& plan,
                               const Disturbances& d);

}  // namespace netlqr
