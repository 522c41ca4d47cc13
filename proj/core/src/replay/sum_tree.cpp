#include "tfddrl/replay/sum_tree.hpp"

#include "tfddrl/errors.hpp"

namespace tfddrl::replay {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity), base_(1) {
  if (capacity == 0) throw ParameterError("sum tree capacity must be positive");
  while (base_ < capacity) base_ <<= 1;
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double value) {
  if (leaf >= capacity_) throw PreconditionError("sum tree leaf out of range");
  if (!(value >= 0.0)) throw DomainError("sum tree values must be non-negative");
  std::size_t i = base_ + leaf;
  nodes_[i] = value;
  // Recompute parents from their children so no rounding drift accumulates.
  for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t SumTree::find(double u) const {
  if (!(total() > 0.0)) throw PreconditionError("sampling from an empty sum tree");
  std::size_t i = 1;
  while (i < base_) {
    const double left = nodes_[2 * i];
    if (u < left || nodes_[2 * i + 1] <= 0.0) {
      i = 2 * i;
    } else {
      u -= left;
      i = 2 * i + 1;
    }
  }
  return i - base_;
}

}  // namespace tfddrl::replay
