#include "tfddrl/mdp/transition.hpp"

#include <algorithm>

namespace tfddrl::mdp {

std::vector<const StateVector*> Trajectory::states() const {
  std::vector<const StateVector*> out;
  out.reserve(transitions.size() + 1);
  for (const auto& t : transitions) out.push_back(&t.state);
  if (!transitions.empty()) out.push_back(&transitions.back().next_state);
  return out;
}

std::size_t Trajectory::window_begin(std::size_t t, std::size_t context) const {
  std::size_t begin = t + 1 > context ? t + 1 - context : 0;
  // State t belongs to the application opened after the latest boundary
  // transition strictly before it.
  for (std::size_t i = t; i > begin; --i) {
    if (transitions[i - 1].app_boundary) return i;
  }
  return begin;
}

bool Trajectory::adjacent() const {
  for (std::size_t i = 0; i + 1 < transitions.size(); ++i) {
    if (!(transitions[i].next_state == transitions[i + 1].state)) return false;
    if (transitions[i].next_mask != transitions[i + 1].mask) return false;
  }
  return true;
}

}  // namespace tfddrl::mdp
