#include "tfddrl/runtime/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "tfddrl/agent/actor.hpp"
#include "tfddrl/errors.hpp"
#include "tfddrl/nn/checkpoint.hpp"
#include "tfddrl/runtime/bounded_queue.hpp"
#include "tfddrl/runtime/policy_store.hpp"
#include "tfddrl/runtime/tcp_transport.hpp"

namespace tfddrl::runtime {

void TrainingConfig::validate() const {
  env.validate();
  if (workload.apps.empty()) throw ParameterError("training workload has no applications");
  if (actor_count == 0) throw ParameterError("actor_count must be at least 1");
  if (iterations == 0) throw ParameterError("iterations must be at least 1");
  learner.validate();
  if (mode == ExecutionMode::kSynchronous && transport == Transport::kTcp) {
    throw ParameterError("the tcp transport needs threaded actors");
  }
}

bool TrainingConfig::synchronous() const {
  if (mode == ExecutionMode::kAuto) return actor_count == 1 && transport == Transport::kInProcess;
  return mode == ExecutionMode::kSynchronous;
}

EvalSummary evaluate_policy(const nn::Network& net, const nn::ParameterSet& params,
                            const envsim::EnvironmentSpec& env,
                            const std::vector<workload::AppDag>& apps, const mdp::EnvOptions& options) {
  EvalSummary s;
  if (apps.empty()) return s;
  std::size_t ok = 0;
  for (const auto& dag : apps) {
    const auto r = agent::greedy_rollout(net, params, env, dag, options);
    s.mean_j += r.weighted;
    if (r.failed) {
      ++s.failed;
      continue;
    }
    ++ok;
    s.mean_t += r.cost->response_time;
    s.mean_e += r.cost->energy;
    s.mean_f += r.cost->monetary;
  }
  s.mean_j /= static_cast<double>(apps.size());
  if (ok > 0) {
    s.mean_t /= static_cast<double>(ok);
    s.mean_e /= static_cast<double>(ok);
    s.mean_f /= static_cast<double>(ok);
  }
  return s;
}

IntakeGuard::Verdict IntakeGuard::admit(const TrajectoryEnvelope& envelope, std::uint64_t learner_version) {
  if (!verify(envelope)) return Verdict::kBadChecksum;
  if (envelope.policy_version > learner_version) return Verdict::kFutureVersion;
  if (!seen_.insert(envelope.id).second) return Verdict::kDuplicate;
  return Verdict::kAccepted;
}

std::string_view to_string(IntakeGuard::Verdict verdict) {
  switch (verdict) {
    case IntakeGuard::Verdict::kAccepted: return "accepted";
    case IntakeGuard::Verdict::kBadChecksum: return "bad checksum";
    case IntakeGuard::Verdict::kDuplicate: return "duplicate id";
    case IntakeGuard::Verdict::kFutureVersion: return "version ahead of the learner";
  }
  return "?";
}

workload::WorkloadTrace rotated_workload(const workload::WorkloadTrace& trace, std::size_t actor,
                                         std::size_t actors) {
  workload::WorkloadTrace out = trace;
  if (actors > 0 && !out.apps.empty()) {
    const std::size_t shift = (actor * out.apps.size() / actors) % out.apps.size();
    std::rotate(out.apps.begin(), out.apps.begin() + static_cast<std::ptrdiff_t>(shift), out.apps.end());
  }
  return out;
}

std::string metrics_header() {
  return "iteration,envelopes,mean_reward,loss_value,loss_policy,loss_entropy,loss_total,"
         "policy_version,mean_lag,max_lag,wall_clock_s,eval_j,eval_t,eval_e,eval_f";
}

std::string metrics_row(const IterationRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%.6g,%llu,%.6f", r.iteration,
                r.envelopes, r.metrics.mean_reward, r.metrics.loss_value, r.metrics.loss_policy,
                r.metrics.loss_entropy, r.metrics.loss_total,
                static_cast<unsigned long long>(r.policy_version), r.mean_lag,
                static_cast<unsigned long long>(r.max_lag), r.wall_clock);
  std::string row = buf;
  if (r.eval) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g", r.eval->mean_j, r.eval->mean_t, r.eval->mean_e,
                  r.eval->mean_f);
    row += buf;
  } else {
    row += ",,,,";
  }
  return row;
}

namespace {

constexpr std::uint64_t kSeqBits = 40;

struct ActorSlot {
  std::size_t id = 0;
  std::optional<mdp::SchedulingEnv> env;
  std::mt19937_64 rng;
  std::uint64_t seq = 0;
  std::size_t attempts = 0;
  std::size_t restarts = 0;
};

class Runner {
 public:
  explicit Runner(const TrainingConfig& config)
      : cfg_(config),
        net_(network_config(config)),
        learner_(net_, config.learner, config.seed),
        store_(net_.config().digest(), config.forced_staleness),
        queue_(config.effective_queue_depth()) {
    slots_.resize(cfg_.actor_count);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      slots_[i].id = i;
      reset_actor(slots_[i]);
    }
    actor_options_.n = cfg_.learner.n;
    actor_options_.gamma = cfg_.learner.gamma;
    actor_options_.priority_epsilon = cfg_.learner.per.epsilon;
    if (!cfg_.out_dir.empty()) {
      std::filesystem::create_directories(cfg_.out_dir);
      metrics_.open(cfg_.out_dir / "metrics.csv", std::ios::trunc);
      if (!metrics_) throw IoError("cannot write " + (cfg_.out_dir / "metrics.csv").string());
      metrics_ << metrics_header() << '\n';
    }
    publish();
  }

  TrainingResult run() {
    start_ = std::chrono::steady_clock::now();
    std::exception_ptr failure;
    if (cfg_.synchronous()) {
      try {
        learn_loop();
      } catch (...) {
        failure = std::current_exception();
      }
    } else {
      start_workers();
      try {
        learn_loop();
      } catch (...) {
        failure = std::current_exception();
      }
      shutdown_workers();
    }
    if (failure) std::rethrow_exception(failure);

    if (!cfg_.out_dir.empty()) {
      nn::save_checkpoint(cfg_.out_dir / "checkpoint.bin", net_.config(), learner_.params());
      write_summary();
    }
    result_.params = learner_.params();
    result_.broadcast_log = store_.broadcast_log();
    result_.counters.produced = produced_.load();
    result_.counters.rejected = rejected_.load();
    const auto accounted = result_.counters.consumed + result_.counters.drained + result_.counters.rejected;
    result_.counters.dropped = result_.counters.produced > accounted ? result_.counters.produced - accounted : 0;
    for (const auto& s : slots_) result_.actor_restarts += s.restarts;
    return std::move(result_);
  }

 private:
  static nn::NetworkConfig network_config(const TrainingConfig& c) {
    c.validate();
    nn::NetworkConfig n = c.network;
    n.input_dim = mdp::state_dim(c.env.size());
    n.action_count = c.env.size();
    n.validate();
    return n;
  }

  void log(const std::string& line) {
    std::lock_guard lock(log_mu_);
    if (cfg_.log) {
      cfg_.log(line);
    } else {
      std::clog << line << '\n';
    }
  }

  void reset_actor(ActorSlot& s) {
    s.env.emplace(cfg_.env, rotated_workload(cfg_.workload, s.id, cfg_.actor_count), cfg_.env_options);
    std::seed_seq seq{cfg_.seed, static_cast<std::uint64_t>(s.id), static_cast<std::uint64_t>(s.restarts)};
    s.rng.seed(seq);
  }

  void publish() {
    PolicySnapshot snap;
    snap.params = learner_.params();
    snap.config_digest = net_.config().digest();
    store_.publish(std::move(snap));
  }

  // One trajectory from one actor. A throwing actor is restarted with a fresh
  // environment and rng stream and tries again.
  TrajectoryEnvelope produce(ActorSlot& s) {
    for (;;) {
      const std::size_t attempt = s.attempts++;
      try {
        if (cfg_.actor_fault) cfg_.actor_fault(s.id, attempt);
        std::size_t lag = 0;
        if (cfg_.forced_staleness > 0) {
          lag = std::uniform_int_distribution<std::size_t>(0, cfg_.forced_staleness)(s.rng);
        }
        const SnapshotPtr snap = store_.lagged(lag);
        auto out = agent::actor_episode(*s.env, net_, snap->params, actor_options_, s.rng);
        const std::uint64_t id = (static_cast<std::uint64_t>(s.id) << kSeqBits) | s.seq++;
        return make_envelope(id, s.id, std::move(out.trajectory));
      } catch (const std::exception& e) {
        ++s.restarts;
        log("actor " + std::to_string(s.id) + " crashed on episode " + std::to_string(attempt) + ": " +
            e.what() + "; restarting");
        reset_actor(s);
      }
    }
  }

  bool stop_requested() const { return cfg_.stop != nullptr && cfg_.stop->load(); }

  // Returns false once the transport is closed.
  bool next_envelope(TrajectoryEnvelope& out) {
    if (cfg_.synchronous()) {
      ActorSlot& s = slots_[cursor_];
      cursor_ = (cursor_ + 1) % slots_.size();
      out = produce(s);
      ++produced_;
      return true;
    }
    auto item = queue_.pop();
    if (!item) return false;
    out = std::move(*item);
    return true;
  }

  void learn_loop() {
    const std::size_t min_batch = cfg_.effective_min_batch();
    for (std::size_t it = 1; it <= cfg_.iterations; ++it) {
      std::vector<TrajectoryEnvelope> batch;
      const std::uint64_t version = learner_.params().version;
      while (batch.size() < min_batch) {
        TrajectoryEnvelope e;
        if (!next_envelope(e)) throw PreconditionError("trajectory transport closed during training");
        if (admit(e, version)) batch.push_back(std::move(e));
      }
      if (!cfg_.synchronous()) {
        while (auto more = queue_.try_pop()) {
          if (admit(*more, version)) batch.push_back(std::move(*more));
        }
      }

      if (cfg_.learner_fault) cfg_.learner_fault(it);
      std::vector<mdp::Trajectory> trajectories;
      trajectories.reserve(batch.size());
      IterationRecord rec;
      rec.iteration = it;
      rec.envelopes = batch.size();
      for (auto& e : batch) {
        const std::uint64_t lag = version - e.policy_version;
        rec.mean_lag += static_cast<double>(lag);
        rec.max_lag = std::max(rec.max_lag, lag);
        trajectories.push_back(std::move(e.trajectory));
      }
      rec.mean_lag /= static_cast<double>(batch.size());
      rec.metrics = learner_.update(trajectories);

      // Committed: the whole batch was applied.
      for (const auto& e : batch) {
        result_.audit.push_back({e.id, e.actor_id, e.policy_version, version});
      }
      result_.counters.consumed += batch.size();
      publish();
      rec.policy_version = learner_.params().version;

      const bool last = it == cfg_.iterations;
      if (!cfg_.eval_apps.empty() && (last || (cfg_.eval_every > 0 && it % cfg_.eval_every == 0))) {
        rec.eval = evaluate_policy(net_, learner_.params(), cfg_.env, cfg_.eval_apps, cfg_.env_options);
      }
      rec.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (metrics_.is_open()) metrics_ << metrics_row(rec) << std::endl;
      if (!cfg_.out_dir.empty() && cfg_.checkpoint_every > 0 && it % cfg_.checkpoint_every == 0 && !last) {
        nn::save_checkpoint(cfg_.out_dir / "checkpoint.bin", net_.config(), learner_.params());
      }
      result_.records.push_back(rec);
      const bool keep_going = cfg_.on_iteration ? cfg_.on_iteration(rec) : true;
      if (!last && (!keep_going || stop_requested())) {
        result_.stopped_early = true;
        break;
      }
    }
  }

  bool admit(const TrajectoryEnvelope& e, std::uint64_t version) {
    const auto verdict = guard_.admit(e, version);
    if (verdict == IntakeGuard::Verdict::kAccepted) return true;
    ++rejected_;
    log("rejected envelope " + std::to_string(e.id) + ": " + std::string(to_string(verdict)));
    return false;
  }

  void start_workers() {
    active_ = slots_.size();
    if (cfg_.transport == Transport::kTcp) {
      listener_.emplace(cfg_.port);
      readers_left_ = slots_.size();
      acceptor_ = std::thread([this] {
        for (std::size_t i = 0; i < slots_.size(); ++i) {
          readers_.emplace_back([this, conn = listener_->accept()]() mutable { read_connection(conn); });
        }
      });
    }
    for (auto& s : slots_) actors_.emplace_back([this, &s] { actor_loop(s); });
  }

  void read_connection(FrameConnection& conn) {
    try {
      while (auto payload = conn.receive_frame()) {
        try {
          queue_.push(decode_envelope(*payload));
        } catch (const IoError& e) {
          ++rejected_;
          log(std::string("rejected frame: ") + e.what());
        }
      }
    } catch (const std::exception& e) {
      log(std::string("connection failed: ") + e.what());
    }
    if (--readers_left_ == 0) queue_.close();
  }

  void actor_loop(ActorSlot& s) {
    std::optional<FrameConnection> conn;
    try {
      if (cfg_.transport == Transport::kTcp) conn.emplace(connect_loopback(listener_->port()));
      while (!stopping_.load()) {
        TrajectoryEnvelope e = produce(s);
        if (conn) {
          conn->send_frame(encode_envelope(e));
        } else if (!queue_.push(std::move(e))) {
          break;
        }
        ++produced_;
      }
    } catch (const std::exception& e) {
      log("actor " + std::to_string(s.id) + " lost its transport: " + e.what());
    }
    if (conn) conn->finish_sending();
    if (--active_ == 0 && cfg_.transport == Transport::kInProcess) queue_.close();
  }

  // Stops the actors and accounts for every envelope still in flight.
  void shutdown_workers() {
    stopping_.store(true);
    const std::uint64_t version = learner_.params().version;
    while (auto e = queue_.pop()) {
      if (admit(*e, version)) ++result_.counters.drained;
    }
    for (auto& t : actors_) t.join();
    if (acceptor_.joinable()) acceptor_.join();
    for (auto& t : readers_) t.join();
  }

  void write_summary() {
    nlohmann::json j;
    j["iterations"] = result_.records.size();
    j["actors"] = cfg_.actor_count;
    j["seed"] = cfg_.seed;
    j["policy_version"] = learner_.params().version;
    j["produced"] = produced_.load();
    j["consumed"] = result_.counters.consumed;
    j["rejected"] = rejected_.load();
    std::size_t restarts = 0;
    for (const auto& s : slots_) restarts += s.restarts;
    j["actor_restarts"] = restarts;
    std::ofstream(cfg_.out_dir / "summary.json") << j.dump(2) << '\n';
  }

  const TrainingConfig& cfg_;
  nn::Network net_;
  agent::Learner learner_;
  PolicyStore store_;
  BoundedQueue<TrajectoryEnvelope> queue_;
  agent::ActorOptions actor_options_;
  std::vector<ActorSlot> slots_;
  std::size_t cursor_ = 0;
  IntakeGuard guard_;
  TrainingResult result_;
  std::ofstream metrics_;
  std::chrono::steady_clock::time_point start_;

  std::mutex log_mu_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> produced_{0};
  std::atomic<std::uint64_t> rejected_{0};
  std::atomic<std::size_t> active_{0};
  std::atomic<std::size_t> readers_left_{0};
  std::optional<TcpListener> listener_;
  std::vector<std::thread> actors_;
  std::thread acceptor_;
  std::vector<std::thread> readers_;
};

}  // namespace

TrainingResult run_training(const TrainingConfig& config) { return Runner(config).run(); }

}  // namespace tfddrl::runtime
