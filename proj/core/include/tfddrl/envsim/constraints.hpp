#pragma once

#include <array>
#include <string>
#include <vector>

#include "tfddrl/envsim/cost_model.hpp"

namespace tfddrl::envsim {

struct ConstraintResult {
  std::string name;  // "C1" .. "C6"
  bool passed = true;
  std::vector<std::string> violations;  // human-readable, naming the entity
};

struct FeasibilityReport {
  std::array<ConstraintResult, 6> results;

  bool feasible() const;
  const ConstraintResult& get(int constraint) const { return results.at(constraint - 1); }
};

// Evaluates C1..C6. Violations are reported, never thrown.
//   C1 every task maps to exactly one known server
//   C2 positive bandwidth and data size on every used link
//   C3 positive frequency and RAM on every server
//   C4 per-server sum of task RAM within the server's RAM (<=)
//   C5 cumulative response time non-decreasing along every edge
//   C6 weights renormalize to a convex combination
FeasibilityReport check_constraints(const workload::AppDag& dag, const Assignment& assignment,
                                    const EnvironmentSpec& env);

}  // namespace tfddrl::envsim
