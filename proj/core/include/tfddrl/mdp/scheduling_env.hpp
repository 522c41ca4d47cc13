#pragma once

#include <optional>
#include <vector>

#include "tfddrl/envsim/cost_model.hpp"
#include "tfddrl/mdp/state.hpp"
#include "tfddrl/workload/dag.hpp"

namespace tfddrl::mdp {

// How the response-time term enters the per-step reward while the
// application's critical path is still unknown.
enum class RewardMode {
  // Every task is treated as lying on the critical path: T(C) enters fully.
  kAssumeOnCriticalPath,
  // T(C) counts only when the task extends the running critical path of the
  // tasks placed so far (cumulative finish time >= running maximum).
  kRunningCriticalPathGate,
};

struct EnvOptions {
  RewardMode reward_mode = RewardMode::kAssumeOnCriticalPath;
  FeatureScales scales;
};

struct Observation {
  StateVector state;
  ActionMask mask;
};

struct StepResult {
  double reward = 0.0;
  bool failed = false;
  bool app_done = false;  // the step scheduled the application's last task
  std::optional<envsim::TaskCost> task_cost;      // on success
  std::optional<envsim::CostBreakdown> app_cost;  // when app_done and nothing failed
  envsim::Assignment assignment;                  // final placement when app_done
  Observation next;
};

// Schedules the tasks of each application of a workload, one task per step,
// in topological order. Applications are served in trace order and the
// trace repeats once exhausted. Each instance is owned by a single actor.
class SchedulingEnv {
 public:
  SchedulingEnv(envsim::EnvironmentSpec env, workload::WorkloadTrace workload,
                EnvOptions options = {});

  const Observation& observe() const { return current_; }
  StepResult step(int action);
  void reset();

  const envsim::EnvironmentSpec& environment() const { return env_; }
  const workload::WorkloadTrace& workload() const { return workload_; }
  std::size_t action_count() const { return env_.size(); }
  std::size_t state_size() const { return state_dim(env_.size()); }
  std::size_t app_cursor() const { return app_; }
  int current_task() const { return order_[pos_]; }
  const std::vector<double>& headroom() const { return headroom_; }

 private:
  void begin_app();
  Observation make_observation() const;

  envsim::EnvironmentSpec env_;
  workload::WorkloadTrace workload_;
  EnvOptions options_;

  std::size_t app_ = 0;
  std::size_t pos_ = 0;
  std::optional<workload::DagIndex> index_;
  std::vector<int> order_;
  envsim::Assignment assignment_;
  std::vector<double> headroom_;
  std::vector<double> cumulative_;  // cumulative finish time of placed tasks
  std::vector<std::uint8_t> placed_;
  double running_path_ = 0.0;
  bool any_failed_ = false;
  Observation current_;
};

}  // namespace tfddrl::mdp
