#include "tfddrl/vtrace/vtrace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::vtrace {

void VTraceConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in [0, 1]");
  if (!(c_bar > 0.0) || !(rho_bar > 0.0)) throw ParameterError("truncation levels must be positive");
  if (c_bar > rho_bar) throw ParameterError("c_bar must not exceed rho_bar");
}

VTraceResult vtrace(std::span<const double> rewards, std::span<const double> values,
                    double bootstrap_value, std::span<const double> target_probs,
                    std::span<const double> behavior_probs, const VTraceConfig& config,
                    std::span<const double> discounts) {
  config.validate();
  const std::size_t n = rewards.size();
  if (n == 0) throw ShapeError("vtrace needs at least one step");
  if (values.size() != n || target_probs.size() != n || behavior_probs.size() != n ||
      (!discounts.empty() && discounts.size() != n)) {
    throw ShapeError("vtrace inputs must all have length " + std::to_string(n));
  }

  VTraceResult out;
  out.targets.resize(n);
  out.rhos.resize(n);
  out.cs.resize(n);
  out.deltas.resize(n);
  out.pg_advantages.resize(n);

  const double log_rho_bar = std::log(config.rho_bar);
  const double log_c_bar = std::log(config.c_bar);
  for (std::size_t t = 0; t < n; ++t) {
    const double mu = behavior_probs[t];
    const double pi = target_probs[t];
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw DomainError("behavior probability at step " + std::to_string(t) + " must be positive");
    }
    if (!(pi >= 0.0) || !std::isfinite(pi)) {
      throw DomainError("target probability at step " + std::to_string(t) + " must be non-negative");
    }
    // pi = 0 gives log ratio -inf and a zero weight.
    const double log_ratio = std::log(pi) - std::log(mu);
    out.rhos[t] = std::exp(std::min(log_rho_bar, log_ratio));
    out.cs[t] = std::exp(std::min(log_c_bar, log_ratio));
  }

  double next_value = bootstrap_value;  // V(s_{t+1})
  double next_target = bootstrap_value;  // v_{t+1}
  double acc = 0.0;                      // v_{t+1} - V(s_{t+1})
  for (std::size_t t = n; t-- > 0;) {
    const double gamma = discounts.empty() ? config.gamma : discounts[t];
    out.deltas[t] = out.rhos[t] * (rewards[t] + gamma * next_value - values[t]);
    acc = out.deltas[t] + gamma * out.cs[t] * acc;
    out.targets[t] = values[t] + acc;
    out.pg_advantages[t] = rewards[t] + gamma * next_target - values[t];
    next_value = values[t];
    next_target = out.targets[t];
  }
  return out;
}

std::vector<double> target_policy_pi_rho(std::span<const double> mu, std::span<const double> pi,
                                         double rho_bar) {
  if (mu.size() != pi.size() || mu.empty()) throw ShapeError("mu and pi must have equal, non-zero length");
  if (!(rho_bar > 0.0)) throw DomainError("rho_bar must be positive");
  auto check = [](std::span<const double> p, const char* name) {
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError(std::string(name) + " does not sum to 1");
  };
  check(mu, "mu");
  check(pi, "pi");
  std::vector<double> out(mu.size());
  double z = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    out[a] = std::min(rho_bar * mu[a], pi[a]);
    z += out[a];
  }
  if (!(z > 0.0)) throw DomainError("truncated target policy has zero mass");
  for (double& v : out) v /= z;
  return out;
}

}  // namespace tfddrl::vtrace
