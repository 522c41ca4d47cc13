#include "tfddrl/agent/actor.hpp"

#include <algorithm>
#include <cmath>

#include "tfddrl/errors.hpp"

namespace tfddrl::agent {

int sample_action(const std::vector<double>& probs, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  int last = -1;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    last = static_cast<int>(a);
    acc += probs[a];
    if (u < acc) return last;
  }
  if (last < 0) throw PreconditionError("no action has positive probability");
  return last;
}

int greedy_action(const std::vector<double>& probs) {
  if (probs.empty()) throw PreconditionError("empty action distribution");
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

namespace {

mdp::ActionMask usable_mask(const mdp::ActionMask& mask) {
  if (std::any_of(mask.begin(), mask.end(), [](auto m) { return m != 0; })) return mask;
  return mdp::ActionMask(mask.size(), 1);
}

}  // namespace

ActorOutput actor_episode(mdp::SchedulingEnv& env, const nn::Network& net,
                          const nn::ParameterSet& snapshot, const ActorOptions& options,
                          std::mt19937_64& rng) {
  if (options.n == 0) throw ParameterError("trajectory length must be positive");
  const std::size_t k = net.config().context;
  ActorOutput out;
  auto& traj = out.trajectory;
  traj.policy_version = snapshot.version;
  traj.transitions.reserve(options.n);

  std::vector<double> values;
  values.reserve(options.n + 1);
  std::vector<const mdp::StateVector*> window;
  std::size_t app_start = 0;  // first trajectory index of the current app

  auto evaluate = [&](const mdp::StateVector& current, const mdp::ActionMask& mask,
                      std::size_t t) {
    window.clear();
    const std::size_t first = std::max(app_start, t + 1 > k ? t + 1 - k : std::size_t{0});
    for (std::size_t i = first; i < t; ++i) window.push_back(&traj.transitions[i].state);
    window.push_back(&current);
    return net.forward(snapshot.values, window, mask);
  };

  for (std::size_t t = 0; t < options.n; ++t) {
    mdp::Transition tr;
    tr.state = env.observe().state;
    tr.mask = usable_mask(env.observe().mask);
    const auto fwd = evaluate(tr.state, tr.mask, t);
    tr.action = sample_action(fwd.probs, rng);
    tr.behavior_prob = fwd.probs[tr.action];
    values.push_back(fwd.value);

    const auto step = env.step(tr.action);
    tr.reward = step.reward;
    tr.next_state = step.next.state;
    tr.next_mask = usable_mask(step.next.mask);
    tr.app_boundary = step.app_done;
    out.stats.reward_sum += step.reward;
    if (step.failed) ++out.stats.failures;
    if (step.app_done) {
      if (step.app_cost) {
        out.stats.completed_app_costs.push_back(step.app_cost->weighted);
      } else {
        ++out.stats.failed_apps;
      }
    }
    traj.transitions.push_back(std::move(tr));
    if (step.app_done) app_start = t + 1;
  }

  const auto& last = traj.transitions.back();
  values.push_back(evaluate(last.next_state, last.next_mask, options.n).value);
  for (std::size_t t = 0; t < options.n; ++t) {
    auto& tr = traj.transitions[t];
    const double discount = tr.app_boundary ? 0.0 : options.gamma;
    tr.priority = std::abs(tr.reward + discount * values[t + 1] - values[t]) + options.priority_epsilon;
  }
  return out;
}

RolloutResult greedy_rollout(const nn::Network& net, const nn::ParameterSet& params,
                             const envsim::EnvironmentSpec& env, const workload::AppDag& dag,
                             const mdp::EnvOptions& env_options) {
  workload::WorkloadTrace single;
  single.apps.push_back(dag);
  mdp::SchedulingEnv sim(env, std::move(single), env_options);
  const std::size_t k = net.config().context;

  std::vector<mdp::StateVector> history;
  history.reserve(dag.size());
  std::vector<const mdp::StateVector*> window;
  RolloutResult result;
  for (std::size_t t = 0; t < dag.size(); ++t) {
    history.push_back(sim.observe().state);
    window.clear();
    for (std::size_t i = t + 1 > k ? t + 1 - k : 0; i <= t; ++i) window.push_back(&history[i]);
    const auto fwd = net.forward(params.values, window, usable_mask(sim.observe().mask));
    const auto step = sim.step(greedy_action(fwd.probs));
    if (step.failed) result.failed = true;
    if (step.app_done) {
      result.assignment = step.assignment;
      result.cost = step.app_cost;
    }
  }
  if (result.cost) result.weighted = result.cost->weighted;
  return result;
}

}  // namespace tfddrl::agent
