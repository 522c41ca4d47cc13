#include "tfddrl/envsim/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "tfddrl/errors.hpp"

namespace tfddrl::envsim {
namespace {

void fail(ConstraintResult& r, std::string message) {
  r.passed = false;
  r.violations.push_back(std::move(message));
}

bool valid_server(const EnvironmentSpec& env, int s) {
  return s >= 0 && s < static_cast<int>(env.size());
}

}  // namespace

bool FeasibilityReport::feasible() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

FeasibilityReport check_constraints(const workload::AppDag& dag, const Assignment& assignment,
                                    const EnvironmentSpec& env) {
  FeasibilityReport report;
  for (int i = 0; i < 6; ++i) report.results[i].name = "C" + std::to_string(i + 1);
  auto& c1 = report.results[0];
  auto& c2 = report.results[1];
  auto& c3 = report.results[2];
  auto& c4 = report.results[3];
  auto& c5 = report.results[4];
  auto& c6 = report.results[5];

  const int n_tasks = static_cast<int>(dag.size());
  if (assignment.size() != dag.size()) {
    fail(c1, "assignment has " + std::to_string(assignment.size()) + " entries for " +
                 std::to_string(n_tasks) + " tasks");
  }
  const int covered = std::min<int>(n_tasks, static_cast<int>(assignment.size()));
  for (int t = 0; t < covered; ++t) {
    if (!valid_server(env, assignment.server(t))) {
      fail(c1, "task " + std::to_string(t) + " is not assigned to exactly one known server");
    }
  }
  auto placed = [&](int t) { return t < covered && valid_server(env, assignment.server(t)); };

  for (int t = 0; t < covered; ++t) {
    for (const auto& e : dag.tasks[t].out_edges) {
      if (!(e.bytes > 0.0)) {
        fail(c2, "edge " + std::to_string(t) + "->" + std::to_string(e.successor) +
                     " carries no data");
      }
      if (!placed(t) || e.successor >= covered || !placed(e.successor)) continue;
      const int a = assignment.server(t), b = assignment.server(e.successor);
      if (a != b && !(env.links.bandwidth(a, b) > 0.0)) {
        fail(c2, "link " + std::to_string(a) + "->" + std::to_string(b) + " has no bandwidth");
      }
    }
  }

  for (std::size_t k = 0; k < env.size(); ++k) {
    if (!(env.servers[k].freq > 0.0) || !(env.servers[k].ram > 0.0)) {
      fail(c3, "server " + std::to_string(k) + " needs positive frequency and RAM");
    }
  }

  std::vector<double> ram_used(env.size(), 0.0);
  for (int t = 0; t < covered; ++t) {
    if (placed(t)) ram_used[assignment.server(t)] += dag.tasks[t].ram;
  }
  for (std::size_t k = 0; k < env.size(); ++k) {
    if (ram_used[k] > env.servers[k].ram) {
      fail(c4, "server " + std::to_string(k) + " holds " + std::to_string(ram_used[k]) +
                   " GB of tasks but has " + std::to_string(env.servers[k].ram) + " GB");
    }
  }

  // C5 is only meaningful when every cost can be evaluated.
  if (c1.passed && c2.passed && c3.passed) {
    try {
      const workload::DagIndex index(dag);
      const auto order = workload::validate_and_order(dag);
      std::vector<double> cumulative(dag.size(), 0.0);
      for (int t : order) {
        const double own = task_costs(dag, index, t, assignment, env).response;
        double before = 0.0;
        for (const auto& p : index.predecessors(t)) before = std::max(before, cumulative[p.predecessor]);
        cumulative[t] = before + own;
      }
      for (int t = 0; t < n_tasks; ++t) {
        for (const auto& e : dag.tasks[t].out_edges) {
          if (cumulative[t] > cumulative[e.successor]) {
            fail(c5, "task " + std::to_string(e.successor) + " would finish before predecessor " +
                         std::to_string(t));
          }
        }
      }
    } catch (const Error& e) {
      fail(c5, e.what());
    }
  } else {
    fail(c5, "not evaluable while C1-C3 fail");
  }

  try {
    env.weights.normalized();
  } catch (const Error& e) {
    fail(c6, e.what());
  }
  return report;
}

}  // namespace tfddrl::envsim
