#include "netlqr/messaging.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <stdexcept>

using namespace netlqr;

namespace {

struct Setup {
  InfoGraph ig;
  GainSchedule gs;
  MessagePlan plan;
};

Setup setup(const LQProblem& p) {
  InfoGraph ig = build_info_graph(delay_matrix(p.graph));
  auto [vs, gs] = finite_horizon(p, ig);
  MessagePlan plan = build_plan(p.graph, ig);
  return {std::move(ig), std::move(gs), std::move(plan)};
}

}  // namespace

TEST_CASE("three-node fixture: who sends what, who keeps what") {
  const LQProblem p = fix::example1();
  const Setup s = setup(p);
  // Info node indices: 0={1}, 1={1,2,3}, 2={2,3}, 3={3}.

  // Edge order in the fixture: 1->2 (d1), 2->1 (d1), 2->3 (d0).
  REQUIRE(s.plan.edge_payloads.size() == 3);
  CHECK(s.plan.edge_payloads[0] == std::vector<int>{0});     // zeta^{1}
  CHECK(s.plan.edge_payloads[1] == std::vector<int>{2});     // zeta^{2,3}
  CHECK(s.plan.edge_payloads[2] == std::vector<int>{1, 2});  // both shared sets

  // Memorized literally: everything not refreshed by a delay-0 edge.
  CHECK(s.plan.stored[0] == std::vector<int>{0, 1});
  CHECK(s.plan.stored[1] == std::vector<int>{1, 2});
  CHECK(s.plan.stored[2] == std::vector<int>{3});
  // Actually read next step: node 3 keeps its own root but never reads it.
  CHECK(s.plan.used[0] == std::vector<int>{0, 1});
  CHECK(s.plan.used[1] == std::vector<int>{1, 2});
  CHECK(s.plan.used[2].empty());

  CHECK(s.plan.schedule_order == std::vector<int>{1, 2, 3});
}

TEST_CASE("four-node fixture: edge labels match the worked example") {
  const LQProblem p = fix::example8(4);
  const Setup s = setup(p);
  // Info node indices: 0={1}, 1={1,2,3}, 2={1,2,3,4}, 3={2}, 4={2,3,4},
  //                    5={3}, 6={3,4}.

  // Edge order: 1->2 (d1), 1->3 (d1), 2->4 (d1), 3->4 (d1), 4->3 (d0).
  REQUIRE(s.plan.edge_payloads.size() == 5);
  CHECK(s.plan.edge_payloads[0] == std::vector<int>{0});        // zeta^{1}
  CHECK(s.plan.edge_payloads[1] == std::vector<int>{0});        // zeta^{1}
  CHECK(s.plan.edge_payloads[2] == std::vector<int>{1, 3});     // {1,2,3},{2}
  CHECK(s.plan.edge_payloads[3] == std::vector<int>{1, 5});     // {1,2,3},{3}
  CHECK(s.plan.edge_payloads[4] == std::vector<int>{2, 4, 6});  // all with 3,4

  CHECK(s.plan.stored[0] == std::vector<int>{0, 1, 2});
  CHECK(s.plan.stored[1] == std::vector<int>{1, 2, 3, 4});
  CHECK(s.plan.stored[2] == std::vector<int>{1, 5});
  CHECK(s.plan.stored[3] == std::vector<int>{2, 4, 6});

  CHECK(s.plan.used[0] == std::vector<int>{0, 1, 2});
  CHECK(s.plan.used[1] == std::vector<int>{1, 2, 3, 4});
  // Node 3 rebuilds {1,2,3} from the delay-1 inbox and its root from the
  // measurement, so its memory is pure dead weight.
  CHECK(s.plan.used[2].empty());
  CHECK(s.plan.used[3] == std::vector<int>{2, 4, 6});

  CHECK(s.plan.schedule_order == std::vector<int>{1, 2, 4, 3});
}

TEST_CASE("an isolated node stores its root and sends nothing") {
  const LQProblem p = fix::single_node(3);
  const Setup s = setup(p);
  CHECK(s.plan.edge_payloads.empty());
  CHECK(s.plan.stored[0] == std::vector<int>{0});
  CHECK(s.plan.used[0].empty());
  CHECK(s.plan.schedule_order == std::vector<int>{1});

  const DistributedRun run =
      run_distributed(p, s.ig, s.gs, s.plan, sample_disturbances(p, 4));
  CHECK(run.trace.empty());
  CHECK(run.out_of_span_reads == 0);
}

TEST_CASE("plans demand unit delays") {
  const LQProblem p = fix::relay_pair();
  const InfoGraph ig = build_info_graph(delay_matrix(p.graph));
  CHECK_THROWS_AS(build_plan(p.graph, ig), std::invalid_argument);
  // After relay expansion the plan builds fine.
  const auto [g2, p2] = expand_relays(p.graph, p);
  const InfoGraph ig2 = build_info_graph(delay_matrix(g2));
  CHECK_NOTHROW(build_plan(g2, ig2));
}

TEST_CASE("scheduling is a topological order of the delay-0 subgraph") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 40; ++trial) {
    const NetworkGraph g = fix::random_graph(rng, 2 + trial % 6, 0.7, 1);
    const std::vector<int> order = schedule(g);
    REQUIRE(order.size() == g.nodes.size());
    auto pos = [&](int v) {
      return std::find(order.begin(), order.end(), v) - order.begin();
    };
    for (const Edge& e : g.edges)
      if (e.delay == 0) CHECK(pos(e.from) < pos(e.to));
  }
  // A delay-0 cycle deadlocks the within-step ordering: refused outright.
  NetworkGraph bad;
  bad.nodes = {1, 2};
  bad.edges = {{1, 2, 0}, {2, 1, 0}};
  CHECK_THROWS_AS(schedule(bad), std::invalid_argument);
}

TEST_CASE("distributed execution reproduces the centralized trajectory") {
  std::mt19937_64 rng(71);
  std::vector<LQProblem> cases = {fix::example1(8), fix::example8(6)};
  for (int trial = 0; trial < 10; ++trial) {
    fix::RandomOptions opt;
    opt.max_nodes = 4;
    opt.max_horizon = 5;
    cases.push_back(fix::random_problem(rng, opt));
  }
  for (const LQProblem& p : cases) {
    const Setup s = setup(p);
    const ControllerRealization cr = realize(p, s.ig, s.gs);
    for (std::uint64_t seed : {1ULL, 2ULL}) {
      const Disturbances d = sample_disturbances(p, seed);
      const Trajectory central = simulate(cr, p, d);
      const DistributedRun run = run_distributed(p, s.ig, s.gs, s.plan, d);

      CHECK(run.out_of_span_reads == 0);
      for (int t = 0; t <= p.horizon; ++t) {
        CHECK((run.trajectory.x[t] - central.x[t]).cwiseAbs().maxCoeff() <=
              1e-9 * (1.0 + central.x[t].cwiseAbs().maxCoeff()));
        for (int r = 0; r < s.ig.size(); ++r)
          CHECK((run.trajectory.zeta[t][r] - central.zeta[t][r])
                    .cwiseAbs()
                    .maxCoeff() <= 1e-9);
      }
      for (int t = 0; t < p.horizon; ++t)
        CHECK((run.trajectory.u[t] - central.u[t]).cwiseAbs().maxCoeff() <=
              1e-9 * (1.0 + central.u[t].cwiseAbs().maxCoeff()));
      CHECK(evaluate_cost(run.trajectory, p) ==
            doctest::Approx(evaluate_cost(central, p)).epsilon(1e-9));
    }
  }
}

TEST_CASE("memory accounting matches the static plan") {
  const int T = 8;
  SUBCASE("three-node fixture") {
    const LQProblem p = fix::example1(T);
    const Setup s = setup(p);
    const DistributedRun run =
        run_distributed(p, s.ig, s.gs, s.plan, sample_disturbances(p, 2));
    CHECK(run.reads > 0);
    // Per round: 2+2+1 entries stored, 2+2+0 of them read.
    CHECK(run.stored_entries == 5 * (T - 1));
    CHECK(run.read_entries == 4 * (T - 1));
    CHECK(run.unread_fraction == doctest::Approx(0.2).epsilon(1e-12));
    // Largest per-agent footprint: node 2 keeps zeta^{1,2,3} and zeta^{2,3}.
    CHECK(run.max_memory_scalars == 5);
  }
  SUBCASE("four-node fixture") {
    const LQProblem p = fix::example8(T);
    const Setup s = setup(p);
    const DistributedRun run =
        run_distributed(p, s.ig, s.gs, s.plan, sample_disturbances(p, 2));
    CHECK(run.stored_entries == 12 * (T - 1));
    CHECK(run.read_entries == 10 * (T - 1));
    CHECK(run.unread_fraction == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(run.max_memory_scalars == 11);  // node 2: dims 3+4+1+3
  }
  SUBCASE("per-agent memory equals the plan footprint, within the size cap") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 10; ++trial) {
      fix::RandomOptions opt;
      opt.max_nodes = 5;
      opt.min_horizon = 2;
      const LQProblem p = fix::random_problem(rng, opt);
      const Setup s = setup(p);
      const DistributedRun run =
          run_distributed(p, s.ig, s.gs, s.plan, sample_disturbances(p, 3));
      int plan_max = 0;
      for (std::size_t a = 0; a < s.plan.stored.size(); ++a) {
        int scalars = 0;
        for (int r : s.plan.stored[a])
          scalars += p.partition.subset_dim(Axis::State, s.ig.nodes[r]);
        plan_max = std::max(plan_max, scalars);
      }
      CHECK(run.max_memory_scalars == plan_max);
      const int n = p.partition.node_count();
      CHECK(run.max_memory_scalars <= n * n * p.state_dim());
    }
  }
}

TEST_CASE("message traces carry the planned tags and sane norms") {
  const int T = 5;
  const LQProblem p = fix::example1(T);
  const Setup s = setup(p);
  const DistributedRun run =
      run_distributed(p, s.ig, s.gs, s.plan, sample_disturbances(p, 6));

  // One delay-0 send per step on 2->3; both delay-1 edges fire while a next
  // step exists to read them.
  int d0 = 0, d1 = 0;
  for (const TraceEvent& ev : run.trace) {
    REQUIRE(ev.tags.size() == ev.norms.size());
    CHECK(ev.t >= 0);
    CHECK(ev.t < T);
    if (ev.delay == 0) {
      ++d0;
      CHECK(ev.from == 2);
      CHECK(ev.to == 3);
      CHECK(ev.tags == s.plan.edge_payloads[2]);
    } else {
      ++d1;
      CHECK(ev.t < T - 1);
      const std::size_t e = ev.from == 1 ? 0 : 1;
      CHECK(ev.tags == s.plan.edge_payloads[e]);
    }
    for (double nrm : ev.norms) CHECK(nrm >= 0.0);
  }
  CHECK(d0 == T);
  CHECK(d1 == 2 * (T - 1));
}

TEST_CASE("a plan for the wrong graph is refused") {
  const LQProblem p = fix::example1(3);
  const Setup s = setup(p);
  MessagePlan wrong = s.plan;
  wrong.edge_payloads.pop_back();
  CHECK_THROWS_AS(
      run_distributed(p, s.ig, s.gs, wrong, sample_disturbances(p, 1)),
      std::logic_error);
}

TEST_CASE("protocol survives every random topology it plans for") {
  std::mt19937_64 rng(79);
  int ran = 0;
  for (int trial = 0; trial < 30; ++trial) {
    fix::RandomOptions opt;
    opt.max_nodes = 6;
    opt.max_dim = 1;
    opt.min_horizon = 2;
    opt.max_horizon = 4;
    const LQProblem p = fix::random_problem(rng, opt);
    const Setup s = setup(p);
    const DistributedRun run =
        run_distributed(p, s.ig, s.gs, s.plan, sample_disturbances(p, trial));
    CHECK(run.out_of_span_reads == 0);
    ++ran;
  }
  CHECK(ran == 30);
}
