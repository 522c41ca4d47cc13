#include <benchmark/benchmark.h>

#include <random>

#include "tfddrl/agent/actor.hpp"
#include "tfddrl/agent/learner.hpp"
#include "tfddrl/envsim/cost_model.hpp"
#include "tfddrl/evalcli/baselines.hpp"
#include "tfddrl/replay/prioritized_buffer.hpp"
#include "tfddrl/runtime/envelope.hpp"
#include "tfddrl/vtrace/vtrace.hpp"
#include "tfddrl/workload/generator.hpp"

using namespace tfddrl;

namespace {

struct Fixture {
  envsim::EnvironmentSpec env = envsim::reference_environment();
  workload::WorkloadTrace trace = workload::preset_workload({}, 1);
  nn::Network net;
  nn::ParameterSet params;

  explicit Fixture(bool full = false)
      : net(full ? nn::NetworkConfig::full(mdp::state_dim(3), 3) : nn::NetworkConfig::desk(mdp::state_dim(3), 3)),
        params(net.initial_parameters(1)) {}

  mdp::Trajectory trajectory(std::size_t n) {
    mdp::SchedulingEnv senv(env, trace);
    std::mt19937_64 rng(2);
    agent::ActorOptions o;
    o.n = n;
    return agent::actor_episode(senv, net, params, o, rng).trajectory;
  }
};

void BM_AppCosts(benchmark::State& state) {
  Fixture f;
  const auto& dag = f.trace.apps[0];
  envsim::Assignment a(dag.size());
  for (std::size_t t = 0; t < dag.size(); ++t) a.assign(static_cast<int>(t), static_cast<int>(t % 3));
  for (auto _ : state) benchmark::DoNotOptimize(envsim::app_costs(dag, a, f.env));
}
BENCHMARK(BM_AppCosts);

void BM_Oracle(benchmark::State& state) {
  Fixture f;
  for (auto _ : state) {
    for (const auto& dag : f.trace.apps) {
      benchmark::DoNotOptimize(evalcli::baseline_schedule(evalcli::BaselineKind::kOracle, dag, f.env));
    }
  }
}
BENCHMARK(BM_Oracle)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  Fixture f(state.range(0) != 0);
  const auto traj = f.trajectory(8);
  const auto states = traj.states();
  const nn::StateWindow window(states.data(), f.net.config().context);
  for (auto _ : state) benchmark::DoNotOptimize(f.net.forward(f.params.values, window, traj.transitions[7].mask));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->ArgNames({"full"});

void BM_ActorEpisode(benchmark::State& state) {
  Fixture f;
  mdp::SchedulingEnv senv(f.env, f.trace);
  std::mt19937_64 rng(3);
  agent::ActorOptions o;
  o.n = 16;
  for (auto _ : state) benchmark::DoNotOptimize(agent::actor_episode(senv, f.net, f.params, o, rng));
}
BENCHMARK(BM_ActorEpisode);

void BM_LearnerUpdate(benchmark::State& state) {
  Fixture f;
  std::vector<mdp::Trajectory> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(f.trajectory(16));
  agent::LearnerConfig cfg;
  nn::AdamState adam(f.params.values.size());
  std::mt19937_64 rng(4);
  for (auto _ : state) {
    auto copy = batch;
    benchmark::DoNotOptimize(agent::learner_update(f.net, f.params, adam, copy, cfg, 0, rng));
  }
}
BENCHMARK(BM_LearnerUpdate)->Unit(benchmark::kMillisecond);

void BM_VTrace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> r(n), v(n), pi(n), mu(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = u(rng), v[i] = u(rng), pi[i] = u(rng), mu[i] = u(rng);
  const vtrace::VTraceConfig cfg{0.99, 1.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(vtrace::vtrace(r, v, 0.5, pi, mu, cfg));
}
BENCHMARK(BM_VTrace)->Arg(16)->Arg(256);

void BM_PerSample(benchmark::State& state) {
  replay::PERConfig cfg;
  cfg.capacity = static_cast<std::size_t>(state.range(0));
  replay::PrioritizedBuffer<int> buf(cfg);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < cfg.capacity; ++i) buf.push(static_cast<int>(i), u(rng));
  for (auto _ : state) benchmark::DoNotOptimize(buf.sample(32, 0.4, rng));
}
BENCHMARK(BM_PerSample)->Arg(1024)->Arg(1 << 16);

void BM_EnvelopeRoundTrip(benchmark::State& state) {
  Fixture f;
  const auto env = runtime::make_envelope(1, 0, f.trajectory(16));
  for (auto _ : state) benchmark::DoNotOptimize(runtime::decode_envelope(runtime::encode_envelope(env)));
}
BENCHMARK(BM_EnvelopeRoundTrip);

}  // namespace

BENCHMARK_MAIN();
