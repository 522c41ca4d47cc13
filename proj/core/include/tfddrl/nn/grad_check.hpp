#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "tfddrl/nn/network.hpp"

namespace tfddrl::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::string worst_segment;
  std::size_t parameters = 0;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  // Absolute floor of the relative-error denominator. Entries whose true
  // gradient is ~0 (key biases, saturated units) carry ~1e-11 of stencil
  // noise, which must not read as a relative error of 1.
  double floor = 1e-6;
  std::size_t batch = 3;
  // Applied to the analytic gradient before comparison; lets tests verify that
  // the checker catches a broken backward pass.
  std::function<void(std::span<double>)> corrupt;
};

// Compares every analytic gradient entry of a random batch against central
// differences.
GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed,
                           const GradCheckOptions& options = {});

// Same, for caller-provided parameters and batch.
GradCheckReport grad_check(const Network& net, std::span<const double> params,
                           std::span<const GradientSample> batch, const LossWeights& weights,
                           const GradCheckOptions& options = {});

}  // namespace tfddrl::nn
