#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

#include "tfddrl/nn/config.hpp"

namespace tfddrl::runtime {

struct PolicySnapshot {
  nn::ParameterSet params;  // params.version is the snapshot version
  std::uint64_t config_digest = 0;

  std::uint64_t version() const { return params.version; }
};

using SnapshotPtr = std::shared_ptr<const PolicySnapshot>;

// Latest published snapshot plus a short history, shared between the learner
// (single writer) and the actors. Snapshots are immutable once published.
class PolicyStore {
 public:
  // `history` > 0 keeps that many older snapshots for deliberately stale reads.
  PolicyStore(std::uint64_t config_digest, std::size_t history = 0);

  // Throws PreconditionError unless the version strictly increases and the
  // digest matches.
  void publish(PolicySnapshot snapshot);
  void broadcast(PolicySnapshot snapshot) { publish(std::move(snapshot)); }

  // Null before the first publish.
  SnapshotPtr latest() const;
  // Snapshot `lag` versions behind the latest, clamped to the oldest kept.
  SnapshotPtr lagged(std::size_t lag) const;

  std::uint64_t config_digest() const { return digest_; }
  // Every version ever published, in order.
  std::vector<std::uint64_t> broadcast_log() const;

 private:
  const std::uint64_t digest_;
  const std::size_t history_;
  mutable std::mutex mu_;
  std::deque<SnapshotPtr> snapshots_;  // newest last
  std::vector<std::uint64_t> log_;
};

}  // namespace tfddrl::runtime
