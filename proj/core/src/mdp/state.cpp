#include "tfddrl/mdp/state.hpp"

#include <algorithm>
#include <cmath>

#include "tfddrl/errors.hpp"

namespace tfddrl::mdp {
namespace {

double unit(double value, double scale) {
  if (!(scale > 0.0)) return 0.0;
  return std::clamp(value / scale, 0.0, 1.0);
}

}  // namespace

TaskObservation observe_task(const workload::AppDag& dag, const workload::DagIndex& index,
                             int task) {
  TaskObservation obs;
  obs.task = &dag.tasks[task];
  obs.predecessor_count = static_cast<int>(index.predecessors(task).size());
  obs.successor_count = static_cast<int>(index.successors(task).size());
  for (const auto& p : index.predecessors(task)) obs.incoming_bytes += p.bytes;
  return obs;
}

StateVector encode_state(const TaskObservation& obs, const envsim::EnvironmentSpec& env,
                         std::span<const double> headroom, const FeatureScales& scales) {
  const std::size_t n = env.size();
  if (obs.task == nullptr) throw PreconditionError("encode_state needs a task");
  if (headroom.size() != n) {
    throw ShapeError("headroom covers " + std::to_string(headroom.size()) + " servers, expected " +
                     std::to_string(n));
  }
  std::vector<double> v;
  v.reserve(state_dim(n));

  const auto& task = *obs.task;
  const int buckets = std::max(scales.app_id_buckets, 2);
  v.push_back(unit(task.id, scales.max_task_id));
  v.push_back(static_cast<double>(task.app_id % buckets) / (buckets - 1));
  v.push_back(unit(obs.predecessor_count, scales.max_degree));
  v.push_back(unit(obs.successor_count, scales.max_degree));
  v.push_back(unit(task.cycles, scales.cycles_max));
  v.push_back(unit(task.ram, scales.ram_max));
  v.push_back(unit(obs.incoming_bytes, scales.data_max));
  v.push_back(std::clamp(obs.predecessors_on_path, 0.0, 1.0));

  v.push_back(unit(static_cast<double>(n), scales.max_servers));

  double max_freq = 0, max_ram = 0, max_cloud = 0, max_elec = 0, max_exec = 0, max_tx = 0;
  for (const auto& s : env.servers) {
    max_freq = std::max(max_freq, s.freq);
    max_ram = std::max(max_ram, s.ram);
    max_exec = std::max(max_exec, s.exec_power);
    max_tx = std::max(max_tx, s.tx_power);
    if (s.tier == envsim::Tier::kCloud) max_cloud = std::max(max_cloud, s.cloud_price);
    else max_elec = std::max(max_elec, s.electricity_price);
  }
  std::vector<double> mean_prop(n, 0.0), mean_bw(n, 0.0);
  double max_prop = 0.0, max_bw = 0.0;
  for (std::size_t a = 0; a < n && n > 1; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      mean_prop[a] += env.links.propagation_ms(a, b) / static_cast<double>(n - 1);
      mean_bw[a] += env.links.bandwidth(a, b) / static_cast<double>(n - 1);
    }
    max_prop = std::max(max_prop, mean_prop[a]);
    max_bw = std::max(max_bw, mean_bw[a]);
  }

  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = env.servers[k];
    const bool cloud = s.tier == envsim::Tier::kCloud;
    v.push_back(unit(s.freq, max_freq));
    v.push_back(unit(s.ram, max_ram));
    v.push_back(cloud ? 1.0 : 0.0);
    v.push_back(cloud ? unit(s.cloud_price, max_cloud) : unit(s.electricity_price, max_elec));
    v.push_back(unit(s.exec_power, max_exec));
    v.push_back(unit(s.tx_power, max_tx));
    v.push_back(unit(mean_prop[k], max_prop));
    v.push_back(unit(mean_bw[k], max_bw));
    v.push_back(unit(headroom[k], s.ram));
    const double local = k < obs.incoming_bytes_by_server.size() ? obs.incoming_bytes_by_server[k] : 0.0;
    v.push_back(obs.incoming_bytes > 0.0 ? unit(local, obs.incoming_bytes) : 0.0);
  }
  return StateVector(std::move(v), kTaskFeatureCount);
}

ActionMask feasible_mask(const workload::TaskSpec& task, const envsim::EnvironmentSpec& env,
                         std::span<const double> headroom) {
  if (headroom.size() != env.size()) {
    throw ShapeError("headroom covers " + std::to_string(headroom.size()) + " servers, expected " +
                     std::to_string(env.size()));
  }
  ActionMask mask(env.size());
  for (std::size_t k = 0; k < env.size(); ++k) mask[k] = task.ram <= headroom[k] ? 1 : 0;
  return mask;
}

double reward(const Outcome& outcome) {
  return outcome.success ? -outcome.weighted : kFailurePenalty;
}

}  // namespace tfddrl::mdp
