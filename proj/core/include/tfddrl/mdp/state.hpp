#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tfddrl/envsim/environment.hpp"
#include "tfddrl/workload/dag.hpp"

namespace tfddrl::mdp {

using ActionMask = std::vector<std::uint8_t>;

inline constexpr std::size_t kTaskFeatureCount = 8;
inline constexpr std::size_t kPerServerFeatureCount = 10;

// Size of the encoded state for an environment with `servers` servers:
// task features, one global server-count feature, per-server features.
constexpr std::size_t state_dim(std::size_t servers) {
  return kTaskFeatureCount + 1 + kPerServerFeatureCount * servers;
}

// Scales for min-max normalization of task features (lower bound 0).
struct FeatureScales {
  double max_task_id = 15.0;
  int app_id_buckets = 16;
  double max_degree = 4.0;
  double cycles_max = 5000.0;  // Mcycles
  double ram_max = 1.0;        // GB
  double data_max = 5.0e6;     // bytes
  double max_servers = 8.0;
};

// Fixed-width vector of task features followed by server-set features.
// Every entry lies in [0, 1].
class StateVector {
 public:
  StateVector() = default;
  StateVector(std::vector<double> values, std::size_t task_dim)
      : values_(std::move(values)), task_dim_(task_dim) {}

  std::span<const double> values() const { return values_; }
  std::span<const double> task_features() const { return std::span(values_).first(task_dim_); }
  std::span<const double> server_features() const { return std::span(values_).subspan(task_dim_); }
  std::size_t size() const { return values_.size(); }
  std::size_t task_dim() const { return task_dim_; }

  bool operator==(const StateVector&) const = default;

 private:
  std::vector<double> values_;
  std::size_t task_dim_ = 0;
};

// What the encoder sees about the task being scheduled. Built by the
// scheduling environment from the DAG and the placements made so far.
struct TaskObservation {
  const workload::TaskSpec* task = nullptr;
  int predecessor_count = 0;
  int successor_count = 0;
  double incoming_bytes = 0.0;
  // Share of predecessors on the critical path of the tasks placed so far.
  double predecessors_on_path = 0.0;
  // Incoming bytes whose producer sits on each server.
  std::vector<double> incoming_bytes_by_server;
};

// Observation for a task with no placed predecessors.
TaskObservation observe_task(const workload::AppDag& dag, const workload::DagIndex& index, int task);

StateVector encode_state(const TaskObservation& task, const envsim::EnvironmentSpec& env,
                         std::span<const double> headroom, const FeatureScales& scales = {});

// Server k is feasible iff the task's RAM demand fits the remaining headroom.
ActionMask feasible_mask(const workload::TaskSpec& task, const envsim::EnvironmentSpec& env,
                         std::span<const double> headroom);

inline constexpr double kFailurePenalty = -2.0;

struct Outcome {
  bool success = true;
  double weighted = 0.0;  // per-task J on success
};

// -J on success, kFailurePenalty on failure.
double reward(const Outcome& outcome);

}  // namespace tfddrl::mdp
