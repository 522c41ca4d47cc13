#include "tfddrl/mdp/scheduling_env.hpp"

#include <algorithm>
#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::mdp {

SchedulingEnv::SchedulingEnv(envsim::EnvironmentSpec env, workload::WorkloadTrace workload,
                             EnvOptions options)
    : env_(std::move(env)), workload_(std::move(workload)), options_(options) {
  env_.validate();
  if (workload_.apps.empty()) throw PreconditionError("workload has no applications");
  for (const auto& dag : workload_.apps) workload::validate_and_order(dag);
  reset();
}

void SchedulingEnv::reset() {
  app_ = 0;
  begin_app();
}

void SchedulingEnv::begin_app() {
  const auto& dag = workload_.apps[app_];
  index_.emplace(dag);
  order_ = workload::validate_and_order(dag);
  assignment_ = envsim::Assignment(dag.size());
  headroom_.clear();
  for (const auto& s : env_.servers) headroom_.push_back(s.ram);
  cumulative_.assign(dag.size(), 0.0);
  placed_.assign(dag.size(), 0);
  running_path_ = 0.0;
  any_failed_ = false;
  pos_ = 0;
  current_ = make_observation();
}

Observation SchedulingEnv::make_observation() const {
  const auto& dag = workload_.apps[app_];
  const int task = order_[pos_];
  TaskObservation obs = observe_task(dag, *index_, task);
  obs.incoming_bytes_by_server.assign(env_.size(), 0.0);
  for (const auto& p : index_->predecessors(task)) {
    if (placed_[p.predecessor]) obs.incoming_bytes_by_server[assignment_.server(p.predecessor)] += p.bytes;
  }

  // Critical path of the placed prefix: end at the latest finisher, walk back
  // through the latest-finishing placed predecessor.
  int end = -1;
  for (int t = 0; t < static_cast<int>(dag.size()); ++t) {
    if (placed_[t] && (end == -1 || cumulative_[t] > cumulative_[end])) end = t;
  }
  std::vector<std::uint8_t> on_path(dag.size(), 0);
  for (int t = end; t != -1;) {
    on_path[t] = 1;
    int prev = -1;
    for (const auto& p : index_->predecessors(t)) {
      if (!placed_[p.predecessor]) continue;
      if (prev == -1 || cumulative_[p.predecessor] > cumulative_[prev] ||
          (cumulative_[p.predecessor] == cumulative_[prev] && p.predecessor < prev)) {
        prev = p.predecessor;
      }
    }
    t = prev;
  }
  if (obs.predecessor_count > 0) {
    int hits = 0;
    for (const auto& p : index_->predecessors(task)) hits += on_path[p.predecessor];
    obs.predecessors_on_path = static_cast<double>(hits) / obs.predecessor_count;
  }

  Observation out;
  out.state = encode_state(obs, env_, headroom_, options_.scales);
  out.mask = feasible_mask(dag.tasks[task], env_, headroom_);
  return out;
}

StepResult SchedulingEnv::step(int action) {
  if (action < 0 || action >= static_cast<int>(env_.size())) {
    throw ParameterError("action " + std::to_string(action) + " outside [0, " +
                         std::to_string(env_.size()) + ")");
  }
  const auto& dag = workload_.apps[app_];
  const int task = order_[pos_];
  const auto& spec = dag.tasks[task];

  StepResult result;
  bool success = spec.ram <= headroom_[action];
  if (success) {
    assignment_.assign(task, action);
    try {
      envsim::TaskCostOptions opts;
      opts.skip_unassigned_predecessors = true;
      result.task_cost = envsim::task_costs(dag, *index_, task, assignment_, env_, opts);
    } catch (const ConstraintViolation&) {
      assignment_.clear(task);
      success = false;
    }
  }

  if (success) {
    headroom_[action] -= spec.ram;
    double before = 0.0;
    for (const auto& p : index_->predecessors(task)) {
      if (placed_[p.predecessor]) before = std::max(before, cumulative_[p.predecessor]);
    }
    cumulative_[task] = before + result.task_cost->response;
    placed_[task] = 1;

    double j = result.task_cost->weighted;
    if (options_.reward_mode == RewardMode::kRunningCriticalPathGate &&
        cumulative_[task] < running_path_) {
      const auto bounds = envsim::task_bounds(dag, *index_, task, env_);
      j = envsim::weighted_cost(bounds.t_min, result.task_cost->energy,
                                result.task_cost->monetary, bounds, env_.weights);
    }
    running_path_ = std::max(running_path_, cumulative_[task]);
    result.reward = reward({true, j});
  } else {
    any_failed_ = true;
    result.failed = true;
    result.reward = reward({false, 0.0});
  }

  ++pos_;
  if (pos_ == order_.size()) {
    result.app_done = true;
    result.assignment = assignment_;
    if (!any_failed_) result.app_cost = envsim::app_costs(dag, assignment_, env_);
    app_ = (app_ + 1) % workload_.apps.size();
    begin_app();
  } else {
    current_ = make_observation();
  }
  result.next = current_;
  return result;
}

}  // namespace tfddrl::mdp
