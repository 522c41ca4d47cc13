#include "tfddrl/evalcli/baselines.hpp"

#include <optional>
#include <random>
#include <string>

#include "tfddrl/envsim/constraints.hpp"
#include "tfddrl/errors.hpp"

namespace tfddrl::evalcli {

BaselineKind parse_baseline(std::string_view name) {
  if (name == "random") return BaselineKind::kRandom;
  if (name == "greedy") return BaselineKind::kGreedy;
  if (name == "oracle") return BaselineKind::kOracle;
  throw ParameterError("unknown baseline '" + std::string(name) + "' (random, greedy, oracle)");
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kRandom: return "random";
    case BaselineKind::kGreedy: return "greedy";
    case BaselineKind::kOracle: return "oracle";
  }
  return "?";
}

namespace {

[[noreturn]] void no_room(const workload::AppDag& dag, int task) {
  throw ConstraintViolation("C4", "task " + std::to_string(task) + " of app " +
                                      std::to_string(dag.app_id) + " fits on no server");
}

envsim::Assignment sequential(const workload::AppDag& dag, const envsim::EnvironmentSpec& env,
                              bool greedy, std::uint64_t seed) {
  const workload::DagIndex index(dag);
  envsim::Assignment a(dag.size());
  std::vector<double> headroom;
  for (const auto& s : env.servers) headroom.push_back(s.ram);
  std::mt19937_64 rng(seed);
  for (int task : workload::validate_and_order(dag)) {
    const double ram = dag.tasks[task].ram;
    std::vector<int> fits;
    for (std::size_t k = 0; k < env.size(); ++k) {
      if (ram <= headroom[k]) fits.push_back(static_cast<int>(k));
    }
    if (fits.empty()) no_room(dag, task);
    int pick = fits.front();
    if (greedy) {
      double best = 0.0;
      for (std::size_t i = 0; i < fits.size(); ++i) {
        a.assign(task, fits[i]);
        const double j = envsim::task_costs(dag, index, task, a, env).weighted;
        if (i == 0 || j < best) best = j, pick = fits[i];
      }
    } else {
      std::uniform_int_distribution<std::size_t> u(0, fits.size() - 1);
      pick = fits[u(rng)];
    }
    a.assign(task, pick);
    headroom[pick] -= ram;
  }
  return a;
}

envsim::Assignment oracle(const workload::AppDag& dag, const envsim::EnvironmentSpec& env) {
  if (dag.size() > kOracleMaxTasks || env.size() > kOracleMaxServers) {
    throw LimitError("oracle enumerates at most " + std::to_string(kOracleMaxTasks) + " tasks on " +
                     std::to_string(kOracleMaxServers) + " servers; got " +
                     std::to_string(dag.size()) + " tasks on " + std::to_string(env.size()));
  }
  const int n = static_cast<int>(dag.size());
  const int k = static_cast<int>(env.size());
  std::vector<int> servers(n, 0);
  std::optional<envsim::Assignment> best;
  double best_j = 0.0;
  for (;;) {
    envsim::Assignment a(servers);
    if (envsim::check_constraints(dag, a, env).feasible()) {
      const double j = envsim::app_costs(dag, a, env).weighted;
      if (!best || j < best_j) best = a, best_j = j;
    }
    int i = n - 1;
    while (i >= 0 && ++servers[i] == k) servers[i--] = 0;
    if (i < 0) break;
  }
  if (!best) throw ConstraintViolation("C4", "no feasible assignment for app " + std::to_string(dag.app_id));
  return *best;
}

}  // namespace

ScheduleResult baseline_schedule(BaselineKind kind, const workload::AppDag& dag,
                                 const envsim::EnvironmentSpec& env, std::uint64_t seed) {
  env.validate();
  ScheduleResult out;
  switch (kind) {
    case BaselineKind::kRandom: out.assignment = sequential(dag, env, false, seed); break;
    case BaselineKind::kGreedy: out.assignment = sequential(dag, env, true, seed); break;
    case BaselineKind::kOracle: out.assignment = oracle(dag, env); break;
  }
  out.cost = envsim::app_costs(dag, out.assignment, env);
  return out;
}

}  // namespace tfddrl::evalcli
