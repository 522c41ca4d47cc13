#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "tfddrl/agent/learner.hpp"
#include "tfddrl/envsim/environment.hpp"
#include "tfddrl/mdp/scheduling_env.hpp"
#include "tfddrl/nn/config.hpp"
#include "tfddrl/runtime/envelope.hpp"
#include "tfddrl/workload/dag.hpp"

namespace tfddrl::runtime {

struct IterationRecord;

enum class Transport { kInProcess, kTcp };
enum class ExecutionMode {
  kAuto,         // synchronous for one actor, threaded otherwise
  kSynchronous,  // actors stepped round-robin on the learner thread
  kThreaded,     // one thread per actor
};

struct TrainingConfig {
  envsim::EnvironmentSpec env;
  workload::WorkloadTrace workload;
  // Held-out applications scored with the greedy policy; empty disables eval.
  std::vector<workload::AppDag> eval_apps;
  nn::NetworkConfig network;  // input_dim and action_count are filled from env
  agent::LearnerConfig learner;
  mdp::EnvOptions env_options;

  std::size_t actor_count = 1;
  std::size_t iterations = 100;
  std::uint64_t seed = 1;
  ExecutionMode mode = ExecutionMode::kAuto;
  Transport transport = Transport::kInProcess;
  std::uint16_t port = 0;  // tcp only; 0 picks a free port

  std::size_t min_batch = 0;    // envelopes per iteration; 0 means actor_count
  std::size_t queue_depth = 0;  // 0 means 2 * actor_count
  // Each trajectory is generated with a snapshot drawn uniformly from the
  // last forced_staleness + 1 published versions.
  std::size_t forced_staleness = 0;

  std::size_t eval_every = 0;  // 0 evaluates after the last iteration only
  std::filesystem::path out_dir;  // empty: no metrics file and no checkpoints
  std::size_t checkpoint_every = 0;

  // Fault injection. actor_fault(actor, episode) and learner_fault(iteration)
  // may throw to simulate a crash.
  std::function<void(std::size_t, std::size_t)> actor_fault;
  std::function<void(std::size_t)> learner_fault;
  // Called after every iteration; returning false requests a clean shutdown.
  std::function<bool(const IterationRecord&)> on_iteration;
  // Actor crash reports. Defaults to std::clog.
  std::function<void(const std::string&)> log;
  // Set from outside (e.g. a signal handler) to request a clean shutdown.
  const std::atomic<bool>* stop = nullptr;

  // Throws ParameterError.
  void validate() const;
  std::size_t effective_min_batch() const { return min_batch ? min_batch : actor_count; }
  std::size_t effective_queue_depth() const { return queue_depth ? queue_depth : 2 * actor_count; }
  bool synchronous() const;
};

struct EvalSummary {
  double mean_j = 0.0;  // failed applications count as 1
  double mean_t = 0.0;  // T, E and F over applications without a failure
  double mean_e = 0.0;
  double mean_f = 0.0;
  std::size_t failed = 0;
};

// Greedy rollouts of every application.
EvalSummary evaluate_policy(const nn::Network& net, const nn::ParameterSet& params,
                            const envsim::EnvironmentSpec& env,
                            const std::vector<workload::AppDag>& apps,
                            const mdp::EnvOptions& options = {});

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::size_t envelopes = 0;
  agent::UpdateMetrics metrics;
  std::uint64_t policy_version = 0;  // after the update
  double mean_lag = 0.0;
  std::uint64_t max_lag = 0;
  double wall_clock = 0.0;  // seconds since the start of training
  std::optional<EvalSummary> eval;
};

struct EnvelopeAudit {
  std::uint64_t id = 0;
  std::uint64_t actor_id = 0;
  std::uint64_t policy_version = 0;
  std::uint64_t learner_version = 0;  // when consumed
};

struct TransportCounters {
  std::uint64_t produced = 0;  // handed to the transport by actors
  std::uint64_t consumed = 0;  // applied by the learner
  std::uint64_t drained = 0;   // received after the last iteration, discarded whole
  std::uint64_t rejected = 0;  // bad checksum, duplicate id or future version
  std::uint64_t dropped = 0;   // produced but never accounted for
};

struct TrainingResult {
  nn::ParameterSet params;
  std::vector<IterationRecord> records;
  TransportCounters counters;
  std::size_t actor_restarts = 0;
  std::vector<std::uint64_t> broadcast_log;
  std::vector<EnvelopeAudit> audit;  // consumed envelopes, in order
  bool stopped_early = false;
};

// Checks each envelope once: checksum, unseen id, version not ahead of the
// learner.
class IntakeGuard {
 public:
  enum class Verdict { kAccepted, kBadChecksum, kDuplicate, kFutureVersion };
  Verdict admit(const TrajectoryEnvelope& envelope, std::uint64_t learner_version);

 private:
  std::unordered_set<std::uint64_t> seen_;
};

std::string_view to_string(IntakeGuard::Verdict verdict);

// Applications rotated so that actor i starts at app i * size / actors.
workload::WorkloadTrace rotated_workload(const workload::WorkloadTrace& trace, std::size_t actor,
                                         std::size_t actors);

// Runs the actor/learner loop. Writes metrics.csv and checkpoint.bin under
// out_dir when it is set. A learner failure stops the actors, drains the
// transport and rethrows; the checkpoint on disk is the last one completed.
TrainingResult run_training(const TrainingConfig& config);

// Header and row formatting of metrics.csv.
std::string metrics_header();
std::string metrics_row(const IterationRecord& record);

}  // namespace tfddrl::runtime
