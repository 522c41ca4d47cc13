#pragma once

#include <span>
#include <vector>

#include "tfddrl/envsim/environment.hpp"
#include "tfddrl/workload/dag.hpp"

namespace tfddrl::envsim {

// Task -> server mapping. Each task holds exactly one server index or
// kUnassigned, so C1 is structural.
class Assignment {
 public:
  static constexpr int kUnassigned = -1;

  Assignment() = default;
  explicit Assignment(std::size_t tasks) : server_(tasks, kUnassigned) {}
  explicit Assignment(std::vector<int> servers) : server_(std::move(servers)) {}

  std::size_t size() const { return server_.size(); }
  int server(int task) const { return server_[task]; }
  bool assigned(int task) const { return server_[task] != kUnassigned; }
  void assign(int task, int server) { server_[task] = server; }
  void clear(int task) { server_[task] = kUnassigned; }
  bool complete() const;
  const std::vector<int>& servers() const { return server_; }

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<int> server_;
};

struct TaskCost {
  int task = 0;
  double data_arrival = 0.0;  // T^dat, s
  double execution = 0.0;     // T^ex, s
  double response = 0.0;      // T, s
  double exec_energy = 0.0;   // E^ex, J
  double tx_energy = 0.0;     // E^tr, J (zero for sink tasks)
  double energy = 0.0;        // E, J
  double monetary = 0.0;      // F
  double weighted = 0.0;      // J in [0, 1]
};

struct CostBreakdown {
  double response_time = 0.0;  // along the critical path
  double energy = 0.0;
  double monetary = 0.0;
  double weighted = 0.0;
  std::vector<TaskCost> per_task;
  std::vector<int> critical_path;  // task ids, root to sink
};

struct TaskCostOptions {
  // Predecessors without a server contribute no data-arrival time instead of
  // raising PreconditionError. Used for tasks whose predecessor failed.
  bool skip_unassigned_predecessors = false;
};

// Normalization bounds derived from the environment:
//   T: [L / max Freq, L / min Freq + largest inbound data / slowest link + max propagation]
//   E: [min_k E^ex_k, max_k E^ex_k + sum_out DS / slowest link * max W^tr]
//   F: extremal tier price of the above per server.
// Returns the override when the environment carries one.
CostBounds task_bounds(const workload::AppDag& dag, const workload::DagIndex& index,
                       int task, const EnvironmentSpec& env);

// Application bounds: T via longest path over per-task min/max times,
// E and F as sums of per-task bounds.
CostBounds app_bounds(const workload::AppDag& dag, const EnvironmentSpec& env);

// Min-max normalization clamped to [0, 1]. A degenerate range (max <= min)
// yields 0: the quantity cannot vary and carries no cost signal.
double normalize(double value, double lo, double hi);

double weighted_cost(double t, double e, double f, const CostBounds& bounds,
                     const CostWeights& weights);

// Cost of one task. Transmission energy covers successors that already have a
// server; unassigned successors contribute nothing yet.
// Throws PreconditionError when the task or a predecessor is unassigned,
// ConstraintViolation("C2") for a non-positive bandwidth or data size on a
// used link.
TaskCost task_costs(const workload::AppDag& dag, const workload::DagIndex& index,
                    int task, const Assignment& assignment,
                    const EnvironmentSpec& env, const TaskCostOptions& options = {});

TaskCost task_costs(const workload::AppDag& dag, int task, const Assignment& assignment,
                    const EnvironmentSpec& env);

// Root-to-sink path with the largest cumulative response time. Ties go to
// the smallest task id at every divergence. Throws InvalidDagError on cycles
// and ShapeError when `response` does not cover every task.
std::vector<int> critical_path(const workload::AppDag& dag, std::span<const double> response);

CostBreakdown app_costs(const workload::AppDag& dag, const Assignment& assignment,
                        const EnvironmentSpec& env);

}  // namespace tfddrl::envsim
