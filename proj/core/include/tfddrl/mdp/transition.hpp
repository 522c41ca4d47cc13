#pragma once

#include <cstdint>
#include <vector>

#include "tfddrl/mdp/state.hpp"

namespace tfddrl::mdp {

struct Transition {
  StateVector state;
  ActionMask mask;  // mask the behaviour policy sampled under
  int action = 0;
  double reward = 0.0;
  double behavior_prob = 1.0;  // mu(a_t | s_t), in (0, 1]
  StateVector next_state;
  ActionMask next_mask;
  double priority = 1.0;  // |TD error| + epsilon
  // The scheduled task was the last of its application; next_state opens the
  // next application, so no value is bootstrapped across this step.
  bool app_boundary = false;

  bool operator==(const Transition&) const = default;
};

// n consecutive transitions. The last next_state is the bootstrap input.
struct Trajectory {
  std::vector<Transition> transitions;
  std::uint64_t policy_version = 0;

  std::size_t size() const { return transitions.size(); }
  bool operator==(const Trajectory&) const = default;

  // s_0 .. s_n (n + 1 states).
  std::vector<const StateVector*> states() const;
  // Index of the first state in the attention window ending at state t:
  // the window is confined to the trajectory and to t's application.
  std::size_t window_begin(std::size_t t, std::size_t context) const;
  // Transition t's next_state equals transition t+1's state for every t.
  bool adjacent() const;
};

}  // namespace tfddrl::mdp
