#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tfddrl::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

// In-place bias-corrected Adam update. Throws ShapeError on size mismatch.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& config = {});

}  // namespace tfddrl::nn
