#pragma once

#include <cstdint>
#include <string_view>

#include "tfddrl/envsim/cost_model.hpp"

namespace tfddrl::evalcli {

enum class BaselineKind { kRandom, kGreedy, kOracle };

BaselineKind parse_baseline(std::string_view name);
std::string_view to_string(BaselineKind kind);

inline constexpr std::size_t kOracleMaxTasks = 6;
inline constexpr std::size_t kOracleMaxServers = 5;

struct ScheduleResult {
  envsim::Assignment assignment;
  envsim::CostBreakdown cost;
};

// random: uniform choice among servers with RAM headroom, per task in
//   topological order.
// greedy: per task in topological order, the server with headroom that
//   minimizes the task's weighted cost (smallest index on ties).
// oracle: minimum application J over every feasible assignment, enumerated
//   in lexicographic order (first minimum wins). LimitError beyond
//   kOracleMaxTasks tasks or kOracleMaxServers servers.
// Throws ConstraintViolation("C4") when some task fits on no server.
ScheduleResult baseline_schedule(BaselineKind kind, const workload::AppDag& dag,
                                 const envsim::EnvironmentSpec& env, std::uint64_t seed = 0);

}  // namespace tfddrl::evalcli
