#include "tfddrl/workload/dag.hpp"

#include <functional>
#include <queue>
#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::workload {

DagIndex::DagIndex(const AppDag& dag)
    : preds_(dag.tasks.size()), succs_(dag.tasks.size()) {
  const int n = static_cast<int>(dag.tasks.size());
  for (const auto& task : dag.tasks) {
    for (const auto& e : task.out_edges) {
      if (e.successor < 0 || e.successor >= n) {
        throw ReferenceError("task " + std::to_string(task.id) +
                             " has an edge to unknown task " +
                             std::to_string(e.successor));
      }
      succs_[task.id].push_back(e);
      preds_[e.successor].push_back({task.id, e.bytes});
    }
  }
}

std::vector<int> validate_and_order(const AppDag& dag) {
  const int n = static_cast<int>(dag.tasks.size());
  if (n == 0) throw InvalidDagError("application " + std::to_string(dag.app_id) + " has no tasks");
  for (int i = 0; i < n; ++i) {
    if (dag.tasks[i].id != i) {
      throw ReferenceError("task ids must be contiguous; position " +
                           std::to_string(i) + " holds id " +
                           std::to_string(dag.tasks[i].id));
    }
  }
  std::vector<int> indegree(n, 0);
  for (const auto& task : dag.tasks) {
    for (const auto& e : task.out_edges) {
      if (e.successor < 0 || e.successor >= n) {
        throw ReferenceError("task " + std::to_string(task.id) +
                             " has an edge to unknown task " +
                             std::to_string(e.successor));
      }
      if (e.successor == task.id) {
        throw InvalidDagError("task " + std::to_string(task.id) + " has a self-loop");
      }
      ++indegree[e.successor];
    }
  }

  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int t = ready.top();
    ready.pop();
    order.push_back(t);
    for (const auto& e : dag.tasks[t].out_edges) {
      if (--indegree[e.successor] == 0) ready.push(e.successor);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw InvalidDagError("application " + std::to_string(dag.app_id) + " contains a cycle");
  }
  return order;
}

}  // namespace tfddrl::workload
