#include "tfddrl/runtime/policy_store.hpp"

#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::runtime {

PolicyStore::PolicyStore(std::uint64_t config_digest, std::size_t history)
    : digest_(config_digest), history_(history) {}

void PolicyStore::publish(PolicySnapshot snapshot) {
  if (snapshot.config_digest != digest_) {
    throw PreconditionError("snapshot config digest does not match the learner configuration");
  }
  auto ptr = std::make_shared<const PolicySnapshot>(std::move(snapshot));
  std::lock_guard lock(mu_);
  if (!snapshots_.empty() && ptr->version() <= snapshots_.back()->version()) {
    throw PreconditionError("snapshot version " + std::to_string(ptr->version()) +
                            " does not exceed " + std::to_string(snapshots_.back()->version()));
  }
  log_.push_back(ptr->version());
  snapshots_.push_back(std::move(ptr));
  while (snapshots_.size() > history_ + 1) snapshots_.pop_front();
}

SnapshotPtr PolicyStore::latest() const {
  std::lock_guard lock(mu_);
  return snapshots_.empty() ? nullptr : snapshots_.back();
}

SnapshotPtr PolicyStore::lagged(std::size_t lag) const {
  std::lock_guard lock(mu_);
  if (snapshots_.empty()) return nullptr;
  const std::size_t back = std::min(lag, snapshots_.size() - 1);
  return snapshots_[snapshots_.size() - 1 - back];
}

std::vector<std::uint64_t> PolicyStore::broadcast_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace tfddrl::runtime
