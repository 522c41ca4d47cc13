#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "tfddrl/agent/actor.hpp"
#include "tfddrl/errors.hpp"
#include "tfddrl/nn/checkpoint.hpp"
#include "tfddrl/runtime/bounded_queue.hpp"
#include "tfddrl/runtime/envelope.hpp"
#include "tfddrl/runtime/policy_store.hpp"
#include "tfddrl/runtime/tcp_transport.hpp"
#include "tfddrl/runtime/training.hpp"
#include "tfddrl/workload/generator.hpp"

using namespace tfddrl;
using namespace tfddrl::runtime;
using namespace std::chrono_literals;

namespace {

mdp::Trajectory sample_trajectory(std::uint64_t seed, std::size_t n = 12) {
  mdp::SchedulingEnv env(envsim::reference_environment(), workload::preset_workload({}, seed));
  nn::Network net(nn::NetworkConfig::desk(mdp::state_dim(3), 3));
  auto params = net.initial_parameters(seed);
  params.version = 3;
  std::mt19937_64 rng(seed);
  agent::ActorOptions o;
  o.n = n;
  return agent::actor_episode(env, net, params, o, rng).trajectory;
}

TrainingConfig small_config(std::size_t actors, std::size_t iterations) {
  TrainingConfig c;
  c.env = envsim::reference_environment();
  c.workload = workload::preset_workload({}, 11);
  c.eval_apps = workload::preset_workload({}, 500).apps;
  c.network = nn::NetworkConfig::desk(0, 0);
  c.learner.n = 8;
  c.learner.draws = 4;
  c.learner.per.total_iterations = iterations;
  c.actor_count = actors;
  c.iterations = iterations;
  c.seed = 5;
  c.log = [](const std::string&) {};
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tfddrl_runtime_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

void expect_balanced(const TrainingResult& r) {
  EXPECT_EQ(r.counters.dropped, 0u);
  EXPECT_EQ(r.counters.rejected, 0u);
  EXPECT_EQ(r.counters.produced, r.counters.consumed + r.counters.drained);
  std::set<std::uint64_t> ids;
  for (const auto& a : r.audit) EXPECT_TRUE(ids.insert(a.id).second) << "envelope consumed twice";
}

}  // namespace

TEST(BoundedQueue, FifoAndClose) {
  BoundedQueue<int> q(3);
  EXPECT_TRUE(q.push(1));
  EXPECT_TRUE(q.push(2));
  EXPECT_EQ(q.pop().value(), 1);
  q.close();
  EXPECT_FALSE(q.push(3));
  EXPECT_EQ(q.pop().value(), 2);
  EXPECT_FALSE(q.pop().has_value());
  EXPECT_FALSE(q.try_pop().has_value());
}

TEST(BoundedQueue, ProducerBlocksWhenFull) {
  BoundedQueue<int> q(1);
  ASSERT_TRUE(q.push(1));
  std::atomic<bool> pushed{false};
  std::thread producer([&] {
    q.push(2);
    pushed = true;
  });
  std::this_thread::sleep_for(50ms);
  EXPECT_FALSE(pushed.load());
  EXPECT_EQ(q.size(), 1u);
  EXPECT_EQ(q.pop().value(), 1);
  producer.join();
  EXPECT_TRUE(pushed.load());
  EXPECT_EQ(q.pop().value(), 2);
}

TEST(BoundedQueue, CloseReleasesBlockedProducer) {
  BoundedQueue<int> q(1);
  q.push(1);
  std::atomic<int> result{-1};
  std::thread producer([&] { result = q.push(2) ? 1 : 0; });
  std::this_thread::sleep_for(20ms);
  q.close();
  producer.join();
  EXPECT_EQ(result.load(), 0);
}

TEST(PolicyStore, VersionsStrictlyIncrease) {
  PolicyStore store(42, 2);
  EXPECT_EQ(store.latest(), nullptr);
  PolicySnapshot s;
  s.config_digest = 42;
  s.params.version = 1;
  store.publish(s);
  EXPECT_THROW(store.publish(s), PreconditionError);
  s.params.version = 0;
  EXPECT_THROW(store.publish(s), PreconditionError);
  s.params.version = 2;
  s.config_digest = 7;
  EXPECT_THROW(store.publish(s), PreconditionError);
  s.config_digest = 42;
  store.broadcast(s);
  s.params.version = 5;
  store.broadcast(s);
  EXPECT_EQ(store.latest()->version(), 5u);
  EXPECT_EQ(store.broadcast_log(), (std::vector<std::uint64_t>{1, 2, 5}));
}

TEST(PolicyStore, LaggedReadsClampToHistory) {
  PolicyStore store(1, 2);
  for (std::uint64_t v = 0; v < 6; ++v) {
    PolicySnapshot s;
    s.config_digest = 1;
    s.params.version = v;
    store.publish(s);
  }
  EXPECT_EQ(store.lagged(0)->version(), 5u);
  EXPECT_EQ(store.lagged(1)->version(), 4u);
  EXPECT_EQ(store.lagged(2)->version(), 3u);
  EXPECT_EQ(store.lagged(9)->version(), 3u);
}

TEST(PolicyStore, ReadersNeverSeeVersionRegress) {
  PolicyStore store(1);
  PolicySnapshot first;
  first.config_digest = 1;
  store.publish(first);
  std::atomic<bool> done{false};
  std::atomic<bool> regressed{false};
  std::thread reader([&] {
    std::uint64_t last = 0;
    while (!done) {
      const auto v = store.latest()->version();
      if (v < last) regressed = true;
      last = v;
    }
  });
  for (std::uint64_t v = 1; v <= 2000; ++v) {
    PolicySnapshot s;
    s.config_digest = 1;
    s.params.version = v;
    store.publish(s);
  }
  done = true;
  reader.join();
  EXPECT_FALSE(regressed.load());
}

TEST(Envelope, RoundTripIsBitExact) {
  const auto env = make_envelope(77, 2, sample_trajectory(3));
  EXPECT_TRUE(verify(env));
  EXPECT_EQ(env.policy_version, 3u);
  const auto bytes = encode_envelope(env);
  const auto back = decode_envelope(bytes);
  EXPECT_EQ(back, env);
  EXPECT_EQ(encode_envelope(back), bytes);
}

TEST(Envelope, CorruptionIsDetected) {
  const auto bytes = encode_envelope(make_envelope(1, 0, sample_trajectory(4, 4)));
  for (std::size_t pos = 0; pos < bytes.size(); pos += 7) {
    auto bad = bytes;
    bad[pos] ^= 0x10;
    EXPECT_THROW(decode_envelope(bad), IoError) << "flip at byte " << pos;
  }
  EXPECT_THROW(decode_envelope(std::span(bytes).first(bytes.size() - 1)), IoError);
  EXPECT_THROW(decode_envelope(std::vector<std::uint8_t>(5, 0)), IoError);
}

TEST(Envelope, ModifiedTrajectoryFailsVerification) {
  auto env = make_envelope(1, 0, sample_trajectory(5, 4));
  env.trajectory.transitions[2].reward += 1e-12;
  EXPECT_FALSE(verify(env));
}

TEST(Envelope, FrameHeaderIsBigEndian) {
  const std::vector<std::uint8_t> payload(0x0102, 0xAB);
  const auto f = frame(payload);
  ASSERT_EQ(f.size(), payload.size() + 4);
  EXPECT_EQ(f[0], 0);
  EXPECT_EQ(f[1], 0);
  EXPECT_EQ(f[2], 1);
  EXPECT_EQ(f[3], 2);
  EXPECT_EQ(frame_length(std::span<const std::uint8_t, 4>(f.data(), 4)), 0x0102u);
}

TEST(TcpTransport, EnvelopesSurviveTheWire) {
  TcpListener listener;
  std::vector<TrajectoryEnvelope> sent;
  for (std::uint64_t i = 0; i < 5; ++i) sent.push_back(make_envelope(i, 1, sample_trajectory(10 + i)));
  std::thread sender([&] {
    auto conn = connect_loopback(listener.port());
    for (const auto& e : sent) conn.send_frame(encode_envelope(e));
    conn.finish_sending();
  });
  auto conn = listener.accept();
  std::vector<TrajectoryEnvelope> got;
  while (auto payload = conn.receive_frame()) got.push_back(decode_envelope(*payload));
  sender.join();
  EXPECT_EQ(got, sent);
}

TEST(TcpTransport, CorruptedFrameIsRejected) {
  TcpListener listener;
  const auto good = encode_envelope(make_envelope(9, 0, sample_trajectory(2, 4)));
  std::thread sender([&] {
    auto conn = connect_loopback(listener.port());
    auto bad = frame(good);
    bad[40] ^= 0x01;
    conn.send_raw(bad);
    conn.send_frame(good);
    conn.finish_sending();
  });
  auto conn = listener.accept();
  auto first = conn.receive_frame();
  ASSERT_TRUE(first.has_value());
  EXPECT_THROW(decode_envelope(*first), IoError);
  auto second = conn.receive_frame();
  ASSERT_TRUE(second.has_value());
  EXPECT_EQ(decode_envelope(*second).id, 9u);
  EXPECT_FALSE(conn.receive_frame().has_value());
  sender.join();
}

TEST(TcpTransport, TruncatedAndOversizedFrames) {
  TcpListener listener;
  std::thread sender([&] {
    auto a = connect_loopback(listener.port());
    const std::vector<std::uint8_t> cut{0, 0, 0, 10, 1, 2, 3};
    a.send_raw(cut);
    a.finish_sending();
    auto b = connect_loopback(listener.port());
    const std::vector<std::uint8_t> huge{0xFF, 0xFF, 0xFF, 0xFF};
    b.send_raw(huge);
    b.finish_sending();
  });
  auto a = listener.accept();
  EXPECT_THROW(a.receive_frame(), IoError);
  auto b = listener.accept();
  EXPECT_THROW(b.receive_frame(), LimitError);
  sender.join();
}

TEST(IntakeGuard, RejectsDuplicatesFutureVersionsAndBadChecksums) {
  IntakeGuard guard;
  auto e = make_envelope(4, 0, sample_trajectory(6, 4));
  EXPECT_EQ(guard.admit(e, 2), IntakeGuard::Verdict::kFutureVersion);
  EXPECT_EQ(guard.admit(e, 3), IntakeGuard::Verdict::kAccepted);
  EXPECT_EQ(guard.admit(e, 3), IntakeGuard::Verdict::kDuplicate);
  auto bad = make_envelope(5, 0, sample_trajectory(6, 4));
  bad.checksum ^= 1;
  EXPECT_EQ(guard.admit(bad, 9), IntakeGuard::Verdict::kBadChecksum);
}

TEST(RotatedWorkload, StartsEachActorAtItsShare) {
  workload::WorkloadTrace t = workload::preset_workload({}, 1);
  for (int i = 0; i < 4; ++i) t.apps[i].app_id = i;
  const auto r = rotated_workload(t, 1, 2);
  EXPECT_EQ(r.apps[0].app_id, 2);
  EXPECT_EQ(r.apps[3].app_id, 1);
  EXPECT_EQ(rotated_workload(t, 0, 4).apps[0].app_id, 0);
}

TEST(Training, SingleActorIsBitwiseReproducible) {
  auto c = small_config(1, 6);
  c.eval_every = 3;
  const auto a = run_training(c);
  const auto b = run_training(c);
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.records.size(), 6u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].metrics.loss_total, b.records[i].metrics.loss_total);
    EXPECT_EQ(a.records[i].metrics.mean_reward, b.records[i].metrics.mean_reward);
    EXPECT_EQ(a.records[i].envelopes, 1u);
    EXPECT_EQ(a.records[i].max_lag, 0u);
  }
  ASSERT_TRUE(a.records[2].eval && b.records[2].eval);
  EXPECT_EQ(a.records[2].eval->mean_j, b.records[2].eval->mean_j);
  EXPECT_FALSE(a.records[1].eval.has_value());
  EXPECT_EQ(a.params.version, 6u);
  expect_balanced(a);
}

TEST(Training, SeedChangesTheRun) {
  auto c = small_config(1, 3);
  const auto a = run_training(c);
  c.seed = 6;
  EXPECT_NE(run_training(c).params, a.params);
}

TEST(Training, SynchronousMultiActorBatches) {
  auto c = small_config(3, 4);
  c.mode = ExecutionMode::kSynchronous;
  const auto r = run_training(c);
  for (const auto& rec : r.records) EXPECT_EQ(rec.envelopes, 3u);
  std::set<std::uint64_t> actors;
  for (const auto& a : r.audit) actors.insert(a.actor_id);
  EXPECT_EQ(actors.size(), 3u);
  expect_balanced(r);
}

TEST(Training, FourThreadedActorsLoseNothing) {
  auto c = small_config(4, 8);
  c.forced_staleness = 3;
  const auto r = run_training(c);
  ASSERT_EQ(r.records.size(), 8u);
  for (const auto& rec : r.records) EXPECT_GE(rec.envelopes, 4u);
  expect_balanced(r);
  const auto& log = r.broadcast_log;
  ASSERT_EQ(log.size(), 9u);
  for (const auto& a : r.audit) {
    EXPECT_TRUE(std::find(log.begin(), log.end(), a.policy_version) != log.end());
    EXPECT_LE(a.policy_version, a.learner_version);
  }
}

TEST(Training, TcpTransportLosesNothing) {
  auto c = small_config(2, 5);
  c.transport = Transport::kTcp;
  const auto r = run_training(c);
  ASSERT_EQ(r.records.size(), 5u);
  expect_balanced(r);
}

TEST(Training, VersionLagStaysWithinQueueBound) {
  auto c = small_config(2, 10);
  c.queue_depth = 2;
  const auto r = run_training(c);
  for (const auto& rec : r.records) EXPECT_LE(rec.max_lag, c.queue_depth + 1);
  expect_balanced(r);
}

TEST(Training, ForcedStalenessIsHonoured) {
  auto c = small_config(1, 12);
  c.forced_staleness = 4;
  const auto r = run_training(c);
  std::uint64_t worst = 0;
  for (const auto& rec : r.records) {
    EXPECT_LE(rec.max_lag, 4u);
    worst = std::max(worst, rec.max_lag);
    EXPECT_TRUE(std::isfinite(rec.metrics.loss_total));
  }
  EXPECT_GT(worst, 0u);
}

TEST(Training, ActorCrashIsRestarted) {
  auto c = small_config(1, 5);
  std::vector<std::string> lines;
  c.log = [&](const std::string& l) { lines.push_back(l); };
  c.actor_fault = [](std::size_t actor, std::size_t episode) {
    if (actor == 0 && episode == 2) throw std::runtime_error("injected");
  };
  const auto r = run_training(c);
  EXPECT_EQ(r.actor_restarts, 1u);
  EXPECT_EQ(r.records.size(), 5u);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_NE(lines[0].find("injected"), std::string::npos);
}

TEST(Training, ThreadedActorCrashIsRestarted) {
  auto c = small_config(2, 4);
  c.actor_fault = [](std::size_t actor, std::size_t episode) {
    if (actor == 1 && episode == 1) throw std::runtime_error("injected");
  };
  const auto r = run_training(c);
  EXPECT_EQ(r.actor_restarts, 1u);
  expect_balanced(r);
}

TEST(Training, LearnerCrashKeepsLastCheckpoint) {
  for (const auto actors : {std::size_t{1}, std::size_t{3}}) {
    auto c = small_config(actors, 10);
    c.out_dir = scratch_dir("crash" + std::to_string(actors));
    c.checkpoint_every = 2;
    c.learner_fault = [](std::size_t it) {
      if (it == 6) throw NumericError("injected learner failure");
    };
    EXPECT_THROW(run_training(c), NumericError);
    nn::NetworkConfig nc = c.network;
    nc.input_dim = mdp::state_dim(3);
    nc.action_count = 3;
    const auto ck = nn::load_checkpoint(c.out_dir / "checkpoint.bin", nc);
    EXPECT_EQ(ck.version, 4u);
    EXPECT_FALSE(std::filesystem::exists(c.out_dir / "checkpoint.bin.tmp"));
  }
}

TEST(Training, WritesMetricsAndFinalCheckpoint) {
  auto c = small_config(1, 4);
  c.out_dir = scratch_dir("files");
  c.eval_every = 2;
  const auto r = run_training(c);
  std::ifstream in(c.out_dir / "metrics.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, metrics_header());
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.rfind(std::to_string(rows) + ",", 0), 0u);
    EXPECT_EQ(line, metrics_row(r.records[rows - 1]));
  }
  EXPECT_EQ(rows, 4u);
  nn::NetworkConfig nc = c.network;
  nc.input_dim = mdp::state_dim(3);
  nc.action_count = 3;
  EXPECT_EQ(nn::load_checkpoint(c.out_dir / "checkpoint.bin", nc), r.params);
  EXPECT_TRUE(std::filesystem::exists(c.out_dir / "summary.json"));
}

TEST(Training, ShutdownRequestDrainsCleanly) {
  auto c = small_config(4, 50);
  c.on_iteration = [](const IterationRecord& rec) { return rec.iteration < 3; };
  const auto r = run_training(c);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.records.size(), 3u);
  expect_balanced(r);
  EXPECT_EQ(r.params.version, 3u);
}

TEST(Training, StopFlag) {
  auto c = small_config(1, 50);
  std::atomic<bool> stop{true};
  c.stop = &stop;
  const auto r = run_training(c);
  EXPECT_EQ(r.records.size(), 1u);
}

TEST(Training, InvalidConfig) {
  auto c = small_config(0, 3);
  EXPECT_THROW(run_training(c), ParameterError);
  c = small_config(1, 0);
  EXPECT_THROW(run_training(c), ParameterError);
  c = small_config(2, 3);
  c.mode = ExecutionMode::kSynchronous;
  c.transport = Transport::kTcp;
  EXPECT_THROW(run_training(c), ParameterError);
  c = small_config(1, 3);
  c.workload.apps.clear();
  EXPECT_THROW(run_training(c), ParameterError);
}
