#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tfddrl/errors.hpp"
#include "tfddrl/replay/sum_tree.hpp"

namespace tfddrl::replay {

struct PERConfig {
  double alpha = 0.6;
  double beta0 = 0.4;
  double epsilon = 1e-6;
  std::size_t capacity = 1024;
  std::size_t total_iterations = 1;  // beta reaches 1 at iteration total_iterations - 1

  void validate() const;
  // Linear anneal from beta0 to 1; non-decreasing; 1 at the last iteration.
  double beta(std::size_t iteration) const;
};

// Entries are addressed by handles: a push counter that stays unique across
// evictions, so updates to evicted entries can be detected.
using Handle = std::uint64_t;

struct SampleEntry {
  Handle handle = 0;
  std::size_t slot = 0;
  double probability = 0.0;
  double weight = 0.0;  // (N P)^-beta / max over the batch
};

// Proportional prioritized replay over a FIFO ring of `capacity` entries.
// Sampling probability is m^alpha / sum m^alpha. Single-writer.
template <class T>
class PrioritizedBuffer {
 public:
  explicit PrioritizedBuffer(PERConfig config)
      : config_(config), tree_((config.validate(), config.capacity)) {
    items_.resize(config_.capacity);
    priorities_.assign(config_.capacity, 0.0);
  }

  const PERConfig& config() const { return config_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return config_.capacity; }
  bool empty() const { return size_ == 0; }
  std::size_t stale_updates() const { return stale_updates_; }

  // Stores the item with priority |td_error| + epsilon, evicting the oldest
  // entry when full.
  Handle push(T item, double td_error) {
    const Handle h = next_++;
    const std::size_t slot = h % config_.capacity;
    items_[slot] = std::move(item);
    store(slot, std::abs(td_error) + config_.epsilon);
    if (size_ < config_.capacity) ++size_;
    return h;
  }

  bool contains(Handle h) const { return h < next_ && h + size_ >= next_; }

  const T& get(Handle h) const {
    if (!contains(h)) throw ReferenceError("replay handle is not resident");
    return items_[h % config_.capacity];
  }

  double priority(Handle h) const {
    if (!contains(h)) throw ReferenceError("replay handle is not resident");
    return priorities_[h % config_.capacity];
  }

  double probability(Handle h) const {
    return std::pow(priority(h), config_.alpha) / tree_.total();
  }

  // Stores max(|m|, epsilon). Evicted handles are ignored and counted.
  bool update_priority(Handle h, double m) {
    if (!contains(h)) {
      ++stale_updates_;
      return false;
    }
    store(h % config_.capacity, std::max(std::abs(m), config_.epsilon));
    return true;
  }

  // Changes alpha and rebuilds the sampling tree.
  void set_alpha(double alpha) {
    PERConfig c = config_;
    c.alpha = alpha;
    c.validate();
    config_ = c;
    for (std::size_t i = 0; i < config_.capacity; ++i) {
      tree_.set(i, priorities_[i] > 0.0 ? std::pow(priorities_[i], alpha) : 0.0);
    }
  }

  // `count` draws with replacement.
  template <class Rng>
  std::vector<SampleEntry> sample(std::size_t count, double beta, Rng& rng) const {
    if (empty()) throw PreconditionError("sampling from an empty replay buffer");
    std::vector<SampleEntry> out;
    out.reserve(count);
    const double total = tree_.total();
    std::uniform_real_distribution<double> u(0.0, total);
    double max_w = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      SampleEntry e;
      e.slot = tree_.find(u(rng));
      e.handle = handle_of(e.slot);
      e.probability = tree_.get(e.slot) / total;
      e.weight = std::pow(static_cast<double>(size_) * e.probability, -beta);
      max_w = std::max(max_w, e.weight);
      out.push_back(e);
    }
    for (auto& e : out) e.weight /= max_w;
    return out;
  }

 private:
  void store(std::size_t slot, double m) {
    priorities_[slot] = m;
    tree_.set(slot, std::pow(m, config_.alpha));
  }

  Handle handle_of(std::size_t slot) const {
    // Most recent push that landed in this slot.
    const Handle last = next_ - 1;
    const std::size_t last_slot = last % config_.capacity;
    return last - ((last_slot + config_.capacity - slot) % config_.capacity);
  }

  PERConfig config_;
  SumTree tree_;
  std::vector<T> items_;
  std::vector<double> priorities_;
  Handle next_ = 0;
  std::size_t size_ = 0;
  std::size_t stale_updates_ = 0;
};

}  // namespace tfddrl::replay
