#pragma once

#include <cstddef>
#include <vector>

namespace tfddrl::replay {

// Complete binary tree of partial sums over `capacity` non-negative leaves.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_[1]; }
  // Leaf whose cumulative range contains u, for u in [0, total()). Values at
  // or past the total resolve to the last positive leaf.
  std::size_t find(double u) const;

 private:
  std::size_t capacity_;
  std::size_t base_;  // index of leaf 0; a power of two
  std::vector<double> nodes_;
};

}  // namespace tfddrl::replay
