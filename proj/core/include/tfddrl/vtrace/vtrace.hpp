#pragma once

#include <span>
#include <vector>

namespace tfddrl::vtrace {

struct VTraceConfig {
  double gamma = 0.99;
  double c_bar = 1.0;
  double rho_bar = 1.0;

  // Throws ParameterError unless gamma in [0, 1] and 0 < c_bar <= rho_bar.
  void validate() const;
};

struct VTraceResult {
  std::vector<double> targets;        // v_s for s = 0 .. n-1
  std::vector<double> rhos;           // min(rho_bar, pi / mu)
  std::vector<double> cs;             // min(c_bar, pi / mu)
  std::vector<double> deltas;         // rho_t (r_t + gamma_t V(s_{t+1}) - V(s_t))
  std::vector<double> pg_advantages;  // r_t + gamma_t v_{t+1} - V(s_t)
};

// Off-policy corrected n-step targets for one trajectory, computed backwards
// from the bootstrap value. `discounts`, when given, supplies gamma_t per step
// (0 where an episode ends after step t); otherwise config.gamma is used.
// The targets of a suffix starting at x equal entries x.. of the full result,
// so trailing windows need no separate pass.
// Throws ShapeError on length mismatch, DomainError on behavior
// probabilities <= 0 or negative target probabilities.
VTraceResult vtrace(std::span<const double> rewards, std::span<const double> values,
                    double bootstrap_value, std::span<const double> target_probs,
                    std::span<const double> behavior_probs, const VTraceConfig& config,
                    std::span<const double> discounts = {});

// pi_rho(a) = min(rho_bar mu(a), pi(a)) / sum_b min(rho_bar mu(b), pi(b)),
// the policy whose value the truncated operator converges to.
// Throws DomainError when the normalizer is zero or an input is not a
// distribution.
std::vector<double> target_policy_pi_rho(std::span<const double> mu, std::span<const double> pi,
                                         double rho_bar);

}  // namespace tfddrl::vtrace
