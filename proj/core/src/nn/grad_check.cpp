#include "tfddrl/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace tfddrl::nn {

GradCheckReport grad_check(const Network& net, std::span<const double> params,
                           std::span<const GradientSample> batch, const LossWeights& weights,
                           const GradCheckOptions& options) {
  std::vector<double> analytic(params.size(), 0.0);
  net.accumulate_gradients(params, batch, weights, analytic);
  if (options.corrupt) options.corrupt(analytic);

  GradCheckReport report;
  report.parameters = params.size();
  std::vector<double> probe(params.begin(), params.end());
  const double base = net.evaluate_loss(params, batch, weights).total;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    // Fourth-order central stencil: truncation error O(h^4), so a larger
    // step keeps cancellation noise near 1e-12 for unit-scale losses. A
    // rectifier kink inside the stencil shows up as disagreement with the
    // stencil at h / 10, which is then preferred.
    const double keep = probe[i];
    auto at = [&](double x) {
      probe[i] = x;
      return net.evaluate_loss(probe, batch, weights).total;
    };
    auto stencil = [&](double h) {
      return (at(keep - 2 * h) - 8.0 * at(keep - h) + 8.0 * at(keep + h) - at(keep + 2 * h)) /
             (12.0 * h);
    };
    double numeric = stencil(options.step);
    const double fine = stencil(options.step / 10.0);
    // Cancellation noise of the fine stencil; a gap below it says nothing.
    const double fine_noise = 4.0 * std::numeric_limits<double>::epsilon() *
                              (std::abs(base) + 1.0) / (options.step / 10.0);
    const double gap = std::abs(fine - numeric);
    if (gap > 10.0 * fine_noise &&
        gap > 0.1 * options.tolerance * std::max({std::abs(fine), std::abs(numeric), options.floor})) {
      numeric = fine;
    }
    probe[i] = keep;
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), options.floor});
    const double rel = std::abs(numeric - analytic[i]) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
  }
  for (const auto& s : net.layout().segments()) {
    if (report.worst_index >= s.offset && report.worst_index < s.offset + s.size) {
      report.worst_segment = s.name;
    }
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed,
                           const GradCheckOptions& options) {
  Network net(config);
  auto params = net.initial_parameters(seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Perturb away from the symmetric initialization so every path carries signal.
  for (double& v : params.values) v += 0.05 * normal(rng);

  std::vector<std::unique_ptr<mdp::StateVector>> states;
  std::vector<GradientSample> batch;
  const std::size_t n = config.action_count;
  for (std::size_t b = 0; b < options.batch; ++b) {
    GradientSample s;
    const std::size_t len = 1 + b % config.context;
    for (std::size_t i = 0; i < len; ++i) {
      std::vector<double> x(config.input_dim);
      for (double& v : x) v = unit(rng);
      states.push_back(std::make_unique<mdp::StateVector>(x, std::min<std::size_t>(1, x.size())));
      s.window.push_back(states.back().get());
    }
    s.mask.assign(n, 1);
    if (n > 1 && b % 2 == 1) s.mask[n - 1] = 0;
    s.action = static_cast<int>(b % (n > 1 ? n - 1 : 1));
    s.value_target = normal(rng);
    s.advantage = normal(rng);
    s.rho = 0.5 + 0.5 * unit(rng);
    s.is_weight = 0.5 + 0.5 * unit(rng);
    batch.push_back(std::move(s));
  }
  return grad_check(net, params.values, batch, LossWeights{}, options);
}

}  // namespace tfddrl::nn
