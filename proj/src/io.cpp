#include "netlqr/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace netlqr {

using nlohmann::json;

namespace {

json require(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(std::string(where) + ": missing field \"" + key + "\"");
  return j.at(key);
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw InputError(std::string(what) + ": expected a matrix (array of rows)");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw InputError(std::string(what) + ": ragged matrix rows");
    for (int c = 0; c < cols; ++c) {
      const json& v = row.at(c);
      if (!v.is_number())
        throw InputError(std::string(what) + ": non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

bool is_matrix_list(const json& j) {
  // A matrix is [[num,..],..]; a list of matrices is [[[num,..],..],..].
  return j.is_array() && !j.empty() && j.front().is_array() &&
         !j.front().empty() && j.front().front().is_array();
}

// "A": one matrix replicated across the horizon, or a length-T list.
std::vector<Eigen::MatrixXd> matrix_schedule(const json& j, int horizon,
                                             const char* what,
                                             bool* time_invariant) {
  std::vector<Eigen::MatrixXd> out;
  if (is_matrix_list(j)) {
    if (static_cast<int>(j.size()) != horizon)
      throw InputError(std::string(what) + ": expected " +
                       std::to_string(horizon) + " matrices, got " +
                       std::to_string(j.size()));
    for (const json& m : j) out.push_back(matrix_from_json(m, what));
    *time_invariant = false;
  } else {
    out.assign(horizon, matrix_from_json(j, what));
  }
  return out;
}

std::vector<int> int_vector(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array");
  std::vector<int> out;
  for (const json& v : j) {
    if (!v.is_number_integer())
      throw InputError(std::string(what) + ": expected integers");
    out.push_back(v.get<int>());
  }
  return out;
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return j;
}

}  // namespace

NetworkGraph graph_from_json(const json& j) {
  NetworkGraph g;
  g.nodes = int_vector(require(j, "nodes", "graph"), "graph.nodes");
  const json edges = require(j, "edges", "graph");
  if (!edges.is_array()) throw InputError("graph.edges: expected an array");
  for (const json& e : edges) {
    Edge edge;
    edge.from = require(e, "from", "edge").get<int>();
    edge.to = require(e, "to", "edge").get<int>();
    edge.delay = require(e, "delay", "edge").get<int>();
    g.edges.push_back(edge);
  }
  return g;
}

json graph_to_json(const NetworkGraph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges)
    edges.push_back({{"from", e.from}, {"to", e.to}, {"delay", e.delay}});
  return json{{"nodes", g.nodes}, {"edges", edges}};
}

LQProblem problem_from_json(const json& j) {
  NetworkGraph g = graph_from_json(require(j, "graph", "problem"));
  const GraphValidation gv = validate(g);
  if (!gv.ok) throw InputError("invalid graph: " + gv.message());

  std::vector<int> ids = g.nodes;
  std::sort(ids.begin(), ids.end());
  std::vector<int> sdims = int_vector(require(j, "state_dims", "problem"),
                                      "state_dims");
  std::vector<int> idims = int_vector(require(j, "input_dims", "problem"),
                                      "input_dims");
  if (sdims.size() != ids.size() || idims.size() != ids.size())
    throw InputError("state_dims/input_dims must list one entry per node");
  BlockPartition part;
  try {
    part = BlockPartition(ids, sdims, idims);
  } catch (const std::exception& e) {
    throw InputError(std::string("bad partition: ") + e.what());
  }

  const json jt = require(j, "horizon", "problem");
  if (!jt.is_number_integer() || jt.get<int>() < 1)
    throw InputError("horizon must be a positive integer");
  const int T = jt.get<int>();
  const int N = part.total_dim(Axis::State);
  const int M = part.total_dim(Axis::Input);
  const int n = part.node_count();

  LQProblem p;
  p.graph = std::move(g);
  p.partition = part;
  p.horizon = T;
  p.time_invariant = true;

  auto schedule_field = [&](const char* key, int rows, int cols,
                            bool required_field,
                            Eigen::MatrixXd fallback) -> std::vector<Eigen::MatrixXd> {
    if (!j.contains(key)) {
      if (required_field)
        throw InputError(std::string("problem: missing field \"") + key + "\"");
      return std::vector<Eigen::MatrixXd>(T, fallback);
    }
    std::vector<Eigen::MatrixXd> out =
        matrix_schedule(j.at(key), T, key, &p.time_invariant);
    for (const Eigen::MatrixXd& m : out)
      if (m.rows() != rows || m.cols() != cols)
        throw InputError(std::string(key) + ": expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    return out;
  };

  auto as_blocks = [&](std::vector<Eigen::MatrixXd> ms, Axis r, Axis c) {
    std::vector<BlockMatrix> out;
    out.reserve(ms.size());
    for (Eigen::MatrixXd& m : ms)
      out.emplace_back(part, r, c, std::move(m));
    return out;
  };

  p.A = as_blocks(schedule_field("A", N, N, true, {}), Axis::State, Axis::State);
  p.B = as_blocks(schedule_field("B", N, M, true, {}), Axis::State, Axis::Input);
  p.Q = as_blocks(schedule_field("Q", N, N, true, {}), Axis::State, Axis::State);
  p.R = as_blocks(schedule_field("R", M, M, true, {}), Axis::Input, Axis::Input);
  p.S = as_blocks(schedule_field("S", N, M, false, Eigen::MatrixXd::Zero(N, M)),
                  Axis::State, Axis::Input);
  if (j.contains("Qf"))
    p.Qf = BlockMatrix(part, Axis::State, Axis::State,
                       matrix_from_json(j.at("Qf"), "Qf"));
  else
    p.Qf = BlockMatrix(part, Axis::State, Axis::State);
  if (p.Qf.m.rows() != N || p.Qf.m.cols() != N)
    throw InputError("Qf: expected " + std::to_string(N) + "x" +
                     std::to_string(N));

  const json jw = require(j, "W", "problem");
  if (!jw.is_array() || static_cast<int>(jw.size()) != n)
    throw InputError("W must list one entry per node");
  p.W.assign(T, std::vector<Eigen::MatrixXd>(n));
  for (int k = 0; k < n; ++k) {
    const int d = part.dim_at(Axis::State, k);
    const json& e = jw.at(k);
    std::vector<Eigen::MatrixXd> per_t;
    if (is_matrix_list(e)) {
      if (static_cast<int>(e.size()) != T)
        throw InputError("W: per-node list must have horizon entries");
      for (const json& m : e) per_t.push_back(matrix_from_json(m, "W"));
      p.time_invariant = false;
    } else {
      per_t.assign(T, matrix_from_json(e, "W"));
    }
    for (int t = 0; t < T; ++t) {
      if (per_t[t].rows() != d || per_t[t].cols() != d)
        throw InputError("W: node block must be " + std::to_string(d) + "x" +
                         std::to_string(d));
      p.W[t][k] = per_t[t];
    }
  }

  const json js0 = require(j, "Sigma0", "problem");
  if (!js0.is_array() || static_cast<int>(js0.size()) != n)
    throw InputError("Sigma0 must list one matrix per node");
  p.Sigma0.resize(n);
  for (int k = 0; k < n; ++k) {
    p.Sigma0[k] = matrix_from_json(js0.at(k), "Sigma0");
    const int d = part.dim_at(Axis::State, k);
    if (p.Sigma0[k].rows() != d || p.Sigma0[k].cols() != d)
      throw InputError("Sigma0: node block must be " + std::to_string(d) + "x" +
                       std::to_string(d));
  }
  return p;
}

LQProblem load_problem(const std::string& path) {
  return problem_from_json(parse_file(path));
}

NetworkGraph load_graph(const std::string& path) {
  const json j = parse_file(path);
  const json& g = j.is_object() && j.contains("graph") ? j.at("graph") : j;
  return graph_from_json(g);
}

LQProblem with_horizon(const LQProblem& p, int horizon) {
  if (horizon < 1) throw InputError("horizon must be a positive integer");
  if (horizon == p.horizon) return p;
  if (!p.time_invariant)
    throw InputError(
        "cannot override the horizon of a time-varying problem file");
  LQProblem out = p;
  out.horizon = horizon;
  out.A.assign(horizon, p.A[0]);
  out.B.assign(horizon, p.B[0]);
  out.Q.assign(horizon, p.Q[0]);
  out.S.assign(horizon, p.S[0]);
  out.R.assign(horizon, p.R[0]);
  out.W.assign(horizon, p.W[0]);
  return out;
}

json gains_to_json(const GainSchedule& ks, const InfoGraph& ig) {
  json info = json::array();
  for (const NodeSet& s : ig.nodes) info.push_back(s);
  json K = json::array();
  for (const auto& per_t : ks.K) {
    json row = json::array();
    for (const Eigen::MatrixXd& k : per_t) row.push_back(matrix_to_json(k));
    K.push_back(row);
  }
  return json{{"horizon", static_cast<int>(ks.K.size())},
              {"steady_state", false},
              {"info_nodes", info},
              {"K", K}};
}

json steady_gains_to_json(const std::vector<Eigen::MatrixXd>& K,
                          const InfoGraph& ig) {
  json info = json::array();
  for (const NodeSet& s : ig.nodes) info.push_back(s);
  json jk = json::array();
  for (const Eigen::MatrixXd& k : K) jk.push_back(matrix_to_json(k));
  return json{{"horizon", nullptr},
              {"steady_state", true},
              {"info_nodes", info},
              {"K", jk}};
}

GainSchedule load_gains(const std::string& path, const InfoGraph& ig,
                        const LQProblem& p, int horizon) {
  const json j = parse_file(path);
  const json info = require(j, "info_nodes", "gains");
  if (!info.is_array() || static_cast<int>(info.size()) != ig.size())
    throw InputError("gains: info_nodes does not match the problem");
  for (int s = 0; s < ig.size(); ++s) {
    if (int_vector(info.at(s), "info_nodes") != ig.nodes[s])
      throw InputError("gains: info node " + std::to_string(s) +
                       " does not match the problem (expected " +
                       node_set_name(ig.nodes[s]) + ")");
  }
  const bool steady = require(j, "steady_state", "gains").get<bool>();
  const json K = require(j, "K", "gains");

  auto check_dims = [&](const Eigen::MatrixXd& k, int s) {
    const int rows = p.partition.subset_dim(Axis::Input, ig.nodes[s]);
    const int cols = p.partition.subset_dim(Axis::State, ig.nodes[s]);
    if (k.rows() != rows || k.cols() != cols)
      throw InputError("gains: K for " + node_set_name(ig.nodes[s]) +
                       " must be " + std::to_string(rows) + "x" +
                       std::to_string(cols));
  };

  GainSchedule ks;
  if (steady) {
    if (static_cast<int>(K.size()) != ig.size())
      throw InputError("gains: expected one K per info node");
    std::vector<Eigen::MatrixXd> per_r;
    for (int s = 0; s < ig.size(); ++s) {
      per_r.push_back(matrix_from_json(K.at(s), "K"));
      check_dims(per_r.back(), s);
    }
    ks.K.assign(horizon, per_r);
  } else {
    if (static_cast<int>(K.size()) != horizon)
      throw InputError("gains: schedule has " + std::to_string(K.size()) +
                       " steps but the run needs " + std::to_string(horizon));
    for (const json& per_t : K) {
      if (static_cast<int>(per_t.size()) != ig.size())
        throw InputError("gains: expected one K per info node");
      std::vector<Eigen::MatrixXd> row;
      for (int s = 0; s < ig.size(); ++s) {
        row.push_back(matrix_from_json(per_t.at(s), "K"));
        check_dims(row.back(), s);
      }
      ks.K.push_back(std::move(row));
    }
  }
  return ks;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << content;
  if (!out) throw InputError("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string trajectory_csv(const Trajectory& traj, const LQProblem& p) {
  std::ostringstream os;
  os << "t";
  for (int i : p.partition.node_ids())
    for (int d = 0; d < p.partition.dim(Axis::State, i); ++d)
      os << ",x" << i << "_" << d;
  for (int i : p.partition.node_ids())
    for (int d = 0; d < p.partition.dim(Axis::Input, i); ++d)
      os << ",u" << i << "_" << d;
  os << "\n";
  const int T = static_cast<int>(traj.u.size());
  for (int t = 0; t <= T; ++t) {
    os << t;
    for (int k = 0; k < traj.x[t].size(); ++k)
      os << "," << format_g17(traj.x[t][k]);
    if (t < T)
      for (int k = 0; k < traj.u[t].size(); ++k)
        os << "," << format_g17(traj.u[t][k]);
    else
      for (int k = 0; k < traj.u[0].size(); ++k) os << ",";
    os << "\n";
  }
  return os.str();
}

std::string trace_csv(const std::vector<std::vector<double>>& table,
                      const InfoGraph& ig) {
  std::ostringstream os;
  os << "t";
  for (const NodeSet& s : ig.nodes) os << ",trace_" << node_set_name(s);
  os << "\n";
  for (std::size_t t = 0; t < table.size(); ++t) {
    os << t;
    for (double v : table[t]) os << "," << format_g17(v);
    os << "\n";
  }
  return os.str();
}

std::string costs_csv(const MonteCarloResult& mc) {
  std::ostringstream os;
  os << "rollout,cost\n";
  for (std::size_t k = 0; k < mc.costs.size(); ++k)
    os << k << "," << format_g17(mc.costs[k]) << "\n";
  os << "mean," << format_g17(mc.mean) << "\n";
  os << "std_error," << format_g17(mc.std_error) << "\n";
  return os.str();
}

std::string infograph_dot(const InfoGraph& ig) {
  std::ostringstream os;
  os << "digraph infograph {\n  rankdir=LR;\n  node [shape=box];\n";
  for (int s = 0; s < ig.size(); ++s)
    os << "  n" << s << " [label=\"" << node_set_name(ig.nodes[s]) << "\"];\n";
  for (int s = 0; s < ig.size(); ++s)
    os << "  n" << s << " -> n" << ig.descendant[s] << ";\n";
  for (std::size_t a = 0; a < ig.plant_ids.size(); ++a) {
    os << "  w" << ig.plant_ids[a] << " [label=\"w" << ig.plant_ids[a]
       << "\", shape=plaintext];\n";
    os << "  w" << ig.plant_ids[a] << " -> n" << ig.root[a]
       << " [style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

std::string plan_dot(const NetworkGraph& g, const InfoGraph& ig,
                     const MessagePlan& plan) {
  auto tag_list = [&](const std::vector<int>& tags) {
    std::string out;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      if (k) out += ", ";
      out += "z" + node_set_name(ig.nodes[tags[k]]);
    }
    return out;
  };
  std::ostringstream os;
  os << "digraph plan {\n  node [shape=circle];\n";
  for (std::size_t a = 0; a < ig.plant_ids.size(); ++a) {
    os << "  v" << ig.plant_ids[a] << " [label=\"" << ig.plant_ids[a];
    if (!plan.stored[a].empty()) os << "\\nmem: " << tag_list(plan.stored[a]);
    os << "\"];\n";
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const Edge& ed = g.edges[e];
    os << "  v" << ed.from << " -> v" << ed.to << " [label=\""
       << tag_list(plan.edge_payloads[e]) << "\"";
    if (ed.delay == 1) os << ", style=dashed";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

std::string trace_jsonl(const std::vector<TraceEvent>& trace,
                        const InfoGraph& ig) {
  std::ostringstream os;
  for (const TraceEvent& ev : trace) {
    json names = json::array();
    for (int s : ev.tags) names.push_back(node_set_name(ig.nodes[s]));
    const json line = {{"t", ev.t},       {"from", ev.from},
                       {"to", ev.to},     {"delay", ev.delay},
                       {"tags", names},   {"norms", ev.norms}};
    os << line.dump() << "\n";
  }
  return os.str();
}

json infograph_to_json(const InfoGraph& ig) {
  json nodes = json::array();
  for (int s = 0; s < ig.size(); ++s)
    nodes.push_back({{"set", ig.nodes[s]},
                     {"name", node_set_name(ig.nodes[s])},
                     {"descendant", ig.descendant[s]}});
  json roots = json::object();
  for (std::size_t a = 0; a < ig.plant_ids.size(); ++a)
    roots[std::to_string(ig.plant_ids[a])] = ig.root[a];
  return json{{"nodes", nodes}, {"roots", roots}};
}

json verify_report_json(const CompareReport& rep, const OracleResult& oracle,
                        bool pass) {
  return json{{"pass", pass},
              {"synthesized_cost", rep.synthesized_cost},
              {"oracle_cost", rep.oracle_cost},
              {"abs_gap", rep.abs_gap},
              {"rel_gap", rep.rel_gap},
              {"max_map_deviation", rep.max_map_deviation},
              {"maps_compared", rep.maps_compared},
              {"decision_dims", oracle.decision_dims},
              {"condition_number", oracle.condition_number},
              {"min_norm_fallback", oracle.min_norm_fallback}};
}

}  // namespace netlqr
