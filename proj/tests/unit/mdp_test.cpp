#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "tfddrl/envsim/constraints.hpp"
#include "tfddrl/errors.hpp"
#include "tfddrl/mdp/scheduling_env.hpp"
#include "tfddrl/mdp/transition.hpp"
#include "tfddrl/workload/generator.hpp"

using namespace tfddrl;
using namespace tfddrl::mdp;

namespace {

envsim::EnvironmentSpec two_servers() {
  envsim::EnvironmentSpec env;
  env.servers = {{0, envsim::Tier::kEdge, 1000.0, 2.0, 10.0, 1.0, 0.0, 0.3},
                 {1, envsim::Tier::kCloud, 4000.0, 8.0, 50.0, 4.0, 0.2, 0.0}};
  env.links = envsim::LinkMatrix(2);
  env.links.set(0, 1, 4.0, 10e6);
  env.links.set(1, 0, 8.0, 30e6);
  return env;
}

workload::AppDag small_app(int app_id = 0) {
  workload::AppDag dag;
  dag.app_id = app_id;
  dag.tasks = {{0, app_id, 1000.0, 0.5, {{1, 2e6}, {2, 1e6}}},
               {1, app_id, 2500.0, 1.0, {{2, 5e5}}},
               {2, app_id, 500.0, 0.25, {}}};
  return dag;
}

}  // namespace

TEST(EncodeState, HandNormalizedTwoServerExample) {
  const auto env = two_servers();
  const auto dag = small_app(3);
  workload::DagIndex idx(dag);
  auto obs = observe_task(dag, idx, 2);
  obs.predecessors_on_path = 0.5;
  obs.incoming_bytes_by_server = {1e6, 5e5};
  const std::vector<double> headroom{1.5, 2.0};
  const auto s = encode_state(obs, env, headroom);

  ASSERT_EQ(s.size(), state_dim(2));
  ASSERT_EQ(s.size(), 29u);
  const std::vector<double> task{2.0 / 15.0, 3.0 / 15.0, 2.0 / 4.0, 0.0, 500.0 / 5000.0,
                                 0.25, 1.5e6 / 5e6, 0.5};
  for (std::size_t i = 0; i < task.size(); ++i) EXPECT_NEAR(s.task_features()[i], task[i], 1e-15) << i;
  const auto g = s.server_features();
  EXPECT_NEAR(g[0], 2.0 / 8.0, 1e-15);
  // server 0: freq, ram, tier, price, exec, tx, propagation, bandwidth, headroom, local data
  const std::vector<double> s0{0.25, 0.25, 0.0, 1.0, 0.2, 0.25, 0.5, 1.0 / 3.0, 0.75, 2.0 / 3.0};
  const std::vector<double> s1{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.25, 1.0 / 3.0};
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(g[1 + i], s0[i], 1e-15) << "server 0 feature " << i;
    EXPECT_NEAR(g[11 + i], s1[i], 1e-15) << "server 1 feature " << i;
  }
}

TEST(EncodeState, DeterministicAndInUnitRange) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto env = testutil::random_environment(1 + trial % 6, rng);
    workload::GeneratorParams p;
    p.task_count = 6;
    p.app_id = trial;
    const auto dag = workload::generate_dag(p, trial);
    workload::DagIndex idx(dag);
    std::vector<double> headroom;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& s : env.servers) headroom.push_back(s.ram * u(rng));
    for (int t = 0; t < 6; ++t) {
      auto obs = observe_task(dag, idx, t);
      const auto a = encode_state(obs, env, headroom);
      const auto b = encode_state(obs, env, headroom);
      EXPECT_EQ(a, b);
      EXPECT_EQ(a.size(), state_dim(env.size()));
      for (double v : a.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(EncodeState, HeadroomMustCoverServers) {
  const auto env = two_servers();
  const auto dag = small_app();
  workload::DagIndex idx(dag);
  std::vector<double> headroom{1.0};
  EXPECT_THROW(encode_state(observe_task(dag, idx, 0), env, headroom), ShapeError);
}

TEST(FeasibleMask, Examples) {
  const auto env = two_servers();
  workload::TaskSpec t{0, 0, 100.0, 0.0, {}};
  std::vector<double> headroom{0.0, 0.0};
  EXPECT_EQ(feasible_mask(t, env, headroom), (ActionMask{1, 1}));
  t.ram = 2.0;
  headroom = {1.0, 4.0};
  EXPECT_EQ(feasible_mask(t, env, headroom), (ActionMask{0, 1}));
  headroom = {1.0, 1.0};
  EXPECT_EQ(feasible_mask(t, env, headroom), (ActionMask{0, 0}));
}

TEST(Reward, SignAndPenalty) {
  EXPECT_EQ(reward({true, 0.4}), -0.4);
  EXPECT_EQ(reward({false, 0.0}), -2.0);
  EXPECT_LT(kFailurePenalty, reward({true, 1.0}));
}

TEST(SchedulingEnv, RewardMatchesPerTaskCost) {
  const auto env = envsim::reference_environment();
  auto trace = workload::preset_workload({}, 1);
  SchedulingEnv sim(env, trace);
  const auto& dag = trace.apps[0];
  envsim::Assignment a(dag.size());
  std::vector<int> actions{0, 1, 1, 2};
  for (std::size_t i = 0; i < dag.size(); ++i) {
    const int task = sim.current_task();
    a.assign(task, actions[i]);
    const auto r = sim.step(actions[i]);
    ASSERT_FALSE(r.failed);
    workload::DagIndex idx(dag);
    const auto want = envsim::task_costs(dag, idx, task, a, env);
    EXPECT_DOUBLE_EQ(r.reward, -want.weighted);
    EXPECT_DOUBLE_EQ(r.task_cost->response, want.response);
    if (i + 1 == dag.size()) {
      ASSERT_TRUE(r.app_done);
      ASSERT_TRUE(r.app_cost.has_value());
      EXPECT_DOUBLE_EQ(r.app_cost->weighted, envsim::app_costs(dag, a, env).weighted);
      EXPECT_EQ(r.assignment, a);
    }
  }
  EXPECT_EQ(sim.app_cursor(), 1u);
}

TEST(SchedulingEnv, RamFailureSkipsTaskAndContinues) {
  auto env = two_servers();
  env.servers[0].ram = 0.6;
  workload::WorkloadTrace trace{{small_app()}};
  SchedulingEnv sim(env, trace);
  EXPECT_EQ(sim.observe().mask, (ActionMask{1, 1}));
  auto r = sim.step(0);  // task 0 (0.5 GB) fits
  EXPECT_FALSE(r.failed);
  EXPECT_NEAR(sim.headroom()[0], 0.1, 1e-12);
  EXPECT_EQ(sim.observe().mask, (ActionMask{0, 1}));
  r = sim.step(0);  // task 1 (1 GB) does not
  EXPECT_TRUE(r.failed);
  EXPECT_EQ(r.reward, kFailurePenalty);
  r = sim.step(1);
  EXPECT_FALSE(r.failed);
  EXPECT_TRUE(r.app_done);
  EXPECT_FALSE(r.app_cost.has_value());
  // Headroom resets for the next application (the same one, wrapped).
  EXPECT_EQ(sim.app_cursor(), 0u);
  EXPECT_EQ(sim.headroom()[0], 0.6);
}

TEST(SchedulingEnv, OutOfRangeActionRejected) {
  SchedulingEnv sim(two_servers(), {{small_app()}});
  EXPECT_THROW(sim.step(2), ParameterError);
  EXPECT_THROW(sim.step(-1), ParameterError);
}

TEST(SchedulingEnv, MaskedActionsNeverViolateC4) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    auto env = testutil::random_environment(3, rng);
    for (auto& s : env.servers) s.ram = 0.4 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng);
    workload::GeneratorParams p;
    p.task_count = 6;
    const auto dag = workload::generate_dag(p, trial);
    SchedulingEnv sim(env, {{dag}});
    envsim::Assignment a(dag.size());
    bool all_ok = true;
    for (std::size_t i = 0; i < dag.size(); ++i) {
      const auto& mask = sim.observe().mask;
      std::vector<int> allowed;
      for (int k = 0; k < 3; ++k)
        if (mask[k]) allowed.push_back(k);
      if (allowed.empty()) {
        all_ok = false;
        sim.step(0);
        continue;
      }
      const int k = allowed[std::uniform_int_distribution<std::size_t>(0, allowed.size() - 1)(rng)];
      a.assign(sim.current_task(), k);
      const auto r = sim.step(k);
      EXPECT_FALSE(r.failed);
    }
    if (all_ok) EXPECT_TRUE(envsim::check_constraints(dag, a, env).get(4).passed);
  }
}

TEST(SchedulingEnv, RunningGateDropsResponseTermOffPath) {
  // Task 1 and task 2 both follow task 0; task 2 finishes before task 1 so it
  // cannot extend the running critical path.
  auto env = two_servers();
  workload::AppDag dag;
  dag.tasks = {{0, 0, 100.0, 0.1, {{1, 1e5}, {2, 1e5}}}, {1, 0, 3000.0, 0.1, {}}, {2, 0, 100.0, 0.1, {}}};
  EnvOptions gate;
  gate.reward_mode = RewardMode::kRunningCriticalPathGate;
  SchedulingEnv plain(env, {{dag}});
  SchedulingEnv gated(env, {{dag}}, gate);
  for (int k : {0, 0}) {
    EXPECT_DOUBLE_EQ(plain.step(k).reward, gated.step(k).reward);
  }
  const auto rp = plain.step(0);
  const auto rg = gated.step(0);
  EXPECT_GT(rg.reward, rp.reward);
  workload::DagIndex idx(dag);
  const auto b = envsim::task_bounds(dag, idx, 2, env);
  EXPECT_DOUBLE_EQ(-rg.reward, envsim::weighted_cost(b.t_min, rp.task_cost->energy,
                                                      rp.task_cost->monetary, b, env.weights));
}

TEST(Trajectory, WindowConfinedToTrajectoryAndApp) {
  Trajectory tr;
  tr.transitions.resize(6);
  tr.transitions[2].app_boundary = true;  // state 3 opens a new application
  EXPECT_EQ(tr.window_begin(0, 4), 0u);
  EXPECT_EQ(tr.window_begin(2, 4), 0u);
  EXPECT_EQ(tr.window_begin(3, 4), 3u);
  EXPECT_EQ(tr.window_begin(5, 4), 3u);
  EXPECT_EQ(tr.window_begin(6, 2), 5u);
  EXPECT_EQ(tr.states().size(), 7u);
}
