#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tfddrl/envsim/cost_model.hpp"
#include "tfddrl/mdp/scheduling_env.hpp"
#include "tfddrl/mdp/transition.hpp"
#include "tfddrl/nn/network.hpp"

namespace tfddrl::agent {

struct ActorOptions {
  std::size_t n = 16;  // transitions per trajectory
  double gamma = 0.99;
  double priority_epsilon = 1e-6;
};

struct ActorStats {
  double reward_sum = 0.0;
  std::size_t failures = 0;
  // Weighted cost of every application completed without a failure.
  std::vector<double> completed_app_costs;
  std::size_t failed_apps = 0;
};

struct ActorOutput {
  mdp::Trajectory trajectory;
  ActorStats stats;
};

// Draws an action from `probs` by inverse CDF on 53 random bits; entries with
// zero probability are never returned.
int sample_action(const std::vector<double>& probs, std::mt19937_64& rng);

// Highest-probability action, smallest index on ties.
int greedy_action(const std::vector<double>& probs);

// Runs `snapshot` in `env` for exactly options.n steps. The environment keeps
// its position between calls, so successive trajectories continue the
// workload; finishing an application mid-trajectory opens the next one and
// flags the boundary. Attention windows are confined to the trajectory and
// to the current application. When no server can take the task every action
// is allowed (and the step fails).
ActorOutput actor_episode(mdp::SchedulingEnv& env, const nn::Network& net,
                          const nn::ParameterSet& snapshot, const ActorOptions& options,
                          std::mt19937_64& rng);

struct RolloutResult {
  envsim::Assignment assignment;
  std::optional<envsim::CostBreakdown> cost;  // absent when a task failed
  double weighted = 1.0;                      // app J, 1 on failure
  bool failed = false;
};

// Schedules one application with the argmax of the policy.
RolloutResult greedy_rollout(const nn::Network& net, const nn::ParameterSet& params,
                             const envsim::EnvironmentSpec& env, const workload::AppDag& dag,
                             const mdp::EnvOptions& env_options = {});

}  // namespace tfddrl::agent
