#include "tfddrl/envsim/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::envsim {
namespace {

constexpr double kSecondsPerHour = 3600.0;
constexpr double kJoulesPerKwh = 3.6e6;

double monetary(const ServerSpec& s, double response, double energy) {
  return s.tier == Tier::kCloud ? response * s.cloud_price / kSecondsPerHour
                                : energy * s.electricity_price / kJoulesPerKwh;
}

struct LinkExtremes {
  double min_bandwidth = 0.0;  // over usable (positive) off-diagonal links
  double max_propagation_s = 0.0;
  bool any = false;
};

LinkExtremes link_extremes(const EnvironmentSpec& env) {
  LinkExtremes ex;
  ex.min_bandwidth = std::numeric_limits<double>::infinity();
  const std::size_t n = env.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double bw = env.links.bandwidth(a, b);
      if (bw > 0.0) {
        ex.min_bandwidth = std::min(ex.min_bandwidth, bw);
        ex.any = true;
      }
      ex.max_propagation_s = std::max(ex.max_propagation_s, env.links.propagation_s(a, b));
    }
  }
  return ex;
}

// Longest path over per-task weights; `weights` indexed by task id.
double longest_path(const workload::AppDag& dag, const std::vector<int>& order,
                    const std::vector<double>& weights) {
  std::vector<double> best(dag.size(), 0.0);
  double overall = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double tail = 0.0;
    for (const auto& e : dag.tasks[*it].out_edges) tail = std::max(tail, best[e.successor]);
    best[*it] = weights[*it] + tail;
    overall = std::max(overall, best[*it]);
  }
  return overall;
}

void require_server(const EnvironmentSpec& env, int server, int task) {
  if (server < 0 || server >= static_cast<int>(env.size())) {
    throw PreconditionError("task " + std::to_string(task) + " is assigned to unknown server " +
                            std::to_string(server));
  }
}

double transfer_time(const EnvironmentSpec& env, int from, int to, double bytes, int task) {
  const double bw = env.links.bandwidth(from, to);
  if (!(bw > 0.0) || !(bytes > 0.0)) {
    throw ConstraintViolation(
        "C2", "link " + std::to_string(from) + "->" + std::to_string(to) + " used by task " +
                  std::to_string(task) + " needs positive bandwidth and data size");
  }
  return bytes / bw;
}

}  // namespace

bool Assignment::complete() const {
  return std::none_of(server_.begin(), server_.end(), [](int s) { return s == kUnassigned; });
}

double normalize(double value, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

double weighted_cost(double t, double e, double f, const CostBounds& bounds,
                     const CostWeights& weights) {
  const CostWeights w = weights.normalized();
  const double j = w.w1 * normalize(t, bounds.t_min, bounds.t_max) +
                   w.w2 * normalize(e, bounds.e_min, bounds.e_max) +
                   w.w3 * normalize(f, bounds.f_min, bounds.f_max);
  return std::clamp(j, 0.0, 1.0);
}

CostBounds task_bounds(const workload::AppDag& dag, const workload::DagIndex& index, int task,
                       const EnvironmentSpec& env) {
  if (env.bounds_override) return *env.bounds_override;
  const auto& spec = dag.tasks[task];
  const LinkExtremes links = link_extremes(env);

  double inbound = 0.0;
  if (links.any && !index.is_source(task)) {
    double largest = 0.0;
    for (const auto& p : index.predecessors(task)) largest = std::max(largest, p.bytes);
    inbound = largest / links.min_bandwidth + links.max_propagation_s;
  }
  double outbound_bytes = 0.0;
  for (const auto& e : spec.out_edges) outbound_bytes += e.bytes;
  const double outbound_time = links.any ? outbound_bytes / links.min_bandwidth : 0.0;

  double max_tx_power = 0.0;
  for (const auto& s : env.servers) max_tx_power = std::max(max_tx_power, s.tx_power);

  CostBounds b;
  b.t_min = b.e_min = b.f_min = std::numeric_limits<double>::infinity();
  b.t_max = b.e_max = b.f_max = 0.0;
  for (const auto& s : env.servers) {
    const double t_ex = spec.cycles / s.freq;
    const double e_ex = t_ex * s.exec_power;
    const double t_hi = t_ex + inbound;
    const double e_hi = e_ex + outbound_time * s.tx_power;
    b.t_min = std::min(b.t_min, t_ex);
    b.t_max = std::max(b.t_max, t_hi);
    b.e_min = std::min(b.e_min, e_ex);
    b.e_max = std::max(b.e_max, e_ex + outbound_time * max_tx_power);
    b.f_min = std::min(b.f_min, monetary(s, t_ex, e_ex));
    b.f_max = std::max(b.f_max, monetary(s, t_hi, e_hi));
  }
  return b;
}

CostBounds app_bounds(const workload::AppDag& dag, const EnvironmentSpec& env) {
  const workload::DagIndex index(dag);
  const auto order = workload::validate_and_order(dag);
  std::vector<double> t_lo(dag.size()), t_hi(dag.size());
  CostBounds app;
  for (std::size_t i = 0; i < dag.size(); ++i) {
    const CostBounds b = task_bounds(dag, index, static_cast<int>(i), env);
    t_lo[i] = b.t_min;
    t_hi[i] = b.t_max;
    app.e_min += b.e_min;
    app.e_max += b.e_max;
    app.f_min += b.f_min;
    app.f_max += b.f_max;
  }
  app.t_min = longest_path(dag, order, t_lo);
  app.t_max = longest_path(dag, order, t_hi);
  return app;
}

TaskCost task_costs(const workload::AppDag& dag, const workload::DagIndex& index, int task,
                    const Assignment& assignment, const EnvironmentSpec& env,
                    const TaskCostOptions& options) {
  if (task < 0 || task >= static_cast<int>(dag.size())) {
    throw PreconditionError("unknown task " + std::to_string(task));
  }
  if (!assignment.assigned(task)) {
    throw PreconditionError("task " + std::to_string(task) + " has no server");
  }
  const int here = assignment.server(task);
  require_server(env, here, task);
  const ServerSpec& server = env.servers[here];
  const auto& spec = dag.tasks[task];

  TaskCost c;
  c.task = task;
  for (const auto& p : index.predecessors(task)) {
    if (!assignment.assigned(p.predecessor)) {
      if (options.skip_unassigned_predecessors) continue;
      throw PreconditionError("predecessor " + std::to_string(p.predecessor) + " of task " +
                              std::to_string(task) + " has no server");
    }
    const int there = assignment.server(p.predecessor);
    require_server(env, there, p.predecessor);
    if (there == here) continue;
    const double arrival =
        transfer_time(env, there, here, p.bytes, task) + env.links.propagation_s(there, here);
    c.data_arrival = std::max(c.data_arrival, arrival);
  }
  c.execution = spec.cycles / server.freq;
  c.response = c.data_arrival + c.execution;

  c.exec_energy = c.execution * server.exec_power;
  for (const auto& e : index.successors(task)) {
    if (!assignment.assigned(e.successor)) continue;
    const int there = assignment.server(e.successor);
    require_server(env, there, e.successor);
    if (there == here) continue;
    c.tx_energy += transfer_time(env, here, there, e.bytes, task) * server.tx_power;
  }
  const double ends_here = index.is_sink(task) ? 0.0 : 1.0;
  c.energy = c.exec_energy + c.tx_energy * ends_here;
  c.monetary = monetary(server, c.response, c.energy);
  c.weighted = weighted_cost(c.response, c.energy, c.monetary,
                             task_bounds(dag, index, task, env), env.weights);
  return c;
}

TaskCost task_costs(const workload::AppDag& dag, int task, const Assignment& assignment,
                    const EnvironmentSpec& env) {
  return task_costs(dag, workload::DagIndex(dag), task, assignment, env);
}

std::vector<int> critical_path(const workload::AppDag& dag, std::span<const double> response) {
  if (response.size() != dag.size()) {
    throw ShapeError("critical_path needs one response time per task (" +
                     std::to_string(dag.size()) + "), got " + std::to_string(response.size()));
  }
  const auto order = workload::validate_and_order(dag);
  const workload::DagIndex index(dag);

  std::vector<double> best(dag.size(), 0.0);
  std::vector<int> next(dag.size(), -1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int t = *it;
    std::vector<int> succ;
    for (const auto& e : index.successors(t)) succ.push_back(e.successor);
    std::sort(succ.begin(), succ.end());
    double tail = 0.0;
    for (int s : succ) {
      if (next[t] == -1 || best[s] > tail) {
        tail = best[s];
        next[t] = s;
      }
    }
    best[t] = response[t] + tail;
  }
  int start = -1;
  for (int t = 0; t < static_cast<int>(dag.size()); ++t) {
    if (!index.is_source(t)) continue;
    if (start == -1 || best[t] > best[start]) start = t;
  }
  std::vector<int> path;
  for (int t = start; t != -1; t = next[t]) path.push_back(t);
  return path;
}

CostBreakdown app_costs(const workload::AppDag& dag, const Assignment& assignment,
                        const EnvironmentSpec& env) {
  if (assignment.size() != dag.size() || !assignment.complete()) {
    throw PreconditionError("assignment must cover every task of application " +
                            std::to_string(dag.app_id));
  }
  const workload::DagIndex index(dag);
  CostBreakdown out;
  out.per_task.reserve(dag.size());
  std::vector<double> response(dag.size());
  for (int t = 0; t < static_cast<int>(dag.size()); ++t) {
    out.per_task.push_back(task_costs(dag, index, t, assignment, env));
    response[t] = out.per_task.back().response;
    out.energy += out.per_task.back().energy;
    out.monetary += out.per_task.back().monetary;
  }
  out.critical_path = critical_path(dag, response);
  for (int t : out.critical_path) out.response_time += response[t];
  out.weighted = weighted_cost(out.response_time, out.energy, out.monetary,
                               app_bounds(dag, env), env.weights);
  return out;
}

}  // namespace tfddrl::envsim
