#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tfddrl::workload {

// Data shipped from a task to one of its successors.
struct Edge {
  int successor = 0;
  double bytes = 0.0;

  bool operator==(const Edge&) const = default;
};

struct TaskSpec {
  int id = 0;
  int app_id = 0;
  double cycles = 0.0;  // Mcycles
  double ram = 0.0;     // GB
  std::vector<Edge> out_edges;

  bool operator==(const TaskSpec&) const = default;
};

// One application as a DAG of tasks. Task ids are contiguous (tasks[i].id == i).
struct AppDag {
  int app_id = 0;
  int label = 480;  // resolution tag
  std::string kind;
  std::vector<TaskSpec> tasks;

  std::size_t size() const { return tasks.size(); }
  bool operator==(const AppDag&) const = default;
};

struct WorkloadTrace {
  std::vector<AppDag> apps;  // arrival order
};

// Adjacency derived from out_edges. Built once per DAG.
class DagIndex {
 public:
  struct Inbound {
    int predecessor;
    double bytes;
  };

  explicit DagIndex(const AppDag& dag);

  const std::vector<Inbound>& predecessors(int task) const { return preds_[task]; }
  const std::vector<Edge>& successors(int task) const { return succs_[task]; }
  bool is_source(int task) const { return preds_[task].empty(); }
  bool is_sink(int task) const { return succs_[task].empty(); }
  std::size_t size() const { return preds_.size(); }

 private:
  std::vector<std::vector<Inbound>> preds_;
  std::vector<std::vector<Edge>> succs_;
};

// Checks ids, edge references and acyclicity. Returns a topological order
// that picks the smallest ready id first.
// Throws ReferenceError for dangling edges or bad ids, InvalidDagError on cycles.
std::vector<int> validate_and_order(const AppDag& dag);

}  // namespace tfddrl::workload
