#pragma once

#include "netlqr/messaging.hpp"
#include "netlqr/oracle.hpp"
#include "netlqr/riccati.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace netlqr {

// Anything wrong with an input file: missing, unparsable, or shape-invalid.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- JSON problem / graph files -------------------------------------------
//
// A problem file is self-describing:
//   {
//     "graph": {"nodes": [1,2,3],
//               "edges": [{"from":1,"to":2,"delay":0}, ...]},
//     "state_dims": [1,1,1], "input_dims": [1,1,1],   // ascending node order
//     "horizon": 10,
//     "A": [[...]],           // one matrix, or a length-T list of matrices
//     "B": ..., "Q": ..., "R": ...,
//     "S": ...,  "Qf": ...,   // optional, default zero
//     "W": [per-node matrix or length-T list],        // ascending node order
//     "Sigma0": [per-node matrix]
//   }
// A graph file is either such a problem file or the bare "graph" object.

NetworkGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const NetworkGraph& g);

LQProblem problem_from_json(const nlohmann::json& j);
LQProblem load_problem(const std::string& path);
NetworkGraph load_graph(const std::string& path);

// Re-replicates a time-invariant problem at a different horizon; rejects the
// override when the file carried time-varying matrices of another length.
LQProblem with_horizon(const LQProblem& p, int horizon);

// ---- gains files -----------------------------------------------------------
// {"horizon": T|null, "steady_state": bool,
//  "info_nodes": [[1],[1,2,3],...],                    // canonical order
//  "K": [t][r] or [r] (steady state) nested arrays}

nlohmann::json gains_to_json(const GainSchedule& ks, const InfoGraph& ig);
nlohmann::json steady_gains_to_json(const std::vector<Eigen::MatrixXd>& K,
                                    const InfoGraph& ig);
// Loads either form; a steady-state file is replicated across `horizon`.
GainSchedule load_gains(const std::string& path, const InfoGraph& ig,
                        const LQProblem& p, int horizon);

// ---- reports and dumps -----------------------------------------------------

// 17 significant digits: enough for exact double round-trip.
std::string format_g17(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// t, x_0.., u_0.., one row per timestep (u blank on the final row).
std::string trajectory_csv(const Trajectory& traj, const LQProblem& p);
// t, then one Trace(X_t^r) column per info node.
std::string trace_csv(const std::vector<std::vector<double>>& table,
                      const InfoGraph& ig);
// rollout, cost rows plus summary lines.
std::string costs_csv(const MonteCarloResult& mc);

// Information graph in DOT: one box per node set, descendant edges, dashed
// noise-injection edges from each plant node's w.
std::string infograph_dot(const InfoGraph& ig);
// Network graph in DOT with each edge labeled by the zeta tags it carries and
// each agent annotated with its memorized tags.
std::string plan_dot(const NetworkGraph& g, const InfoGraph& ig,
                     const MessagePlan& plan);

// One JSON object per line: {"t":..,"from":..,"to":..,"delay":..,
//                            "tags":[names],"norms":[..]}.
std::string trace_jsonl(const std::vector<TraceEvent>& trace,
                        const InfoGraph& ig);

nlohmann::json infograph_to_json(const InfoGraph& ig);
nlohmann::json verify_report_json(const CompareReport& rep,
                                  const OracleResult& oracle, bool pass);

}  // namespace netlqr
