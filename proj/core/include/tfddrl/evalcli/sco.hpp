#pragma once

#include <cstdint>
#include <vector>

#include "tfddrl/evalcli/analysis.hpp"
#include "tfddrl/mdp/scheduling_env.hpp"
#include "tfddrl/nn/network.hpp"

namespace tfddrl::evalcli {

struct ScoOptions {
  std::size_t iterations = 100;
  std::size_t apps_per_iteration = 4;
  double level = 0.95;
};

struct ScoResult {
  std::vector<double> samples;  // seconds per scheduling iteration
  double time_o = 0.0;          // total
  double time_a = 0.0;          // time_o / iterations
  ConfidenceInterval ci;
};

// Times policy inference plus envelope construction: each iteration
// schedules every task of the next apps_per_iteration applications with the
// sampling policy and packs the trajectory into an envelope. No learning.
ScoResult measure_sco(const nn::Network& net, const nn::ParameterSet& params,
                      const envsim::EnvironmentSpec& env, const workload::WorkloadTrace& workload,
                      const ScoOptions& options = {}, std::uint64_t seed = 1,
                      const mdp::EnvOptions& env_options = {});

}  // namespace tfddrl::evalcli
