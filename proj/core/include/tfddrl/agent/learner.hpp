#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tfddrl/mdp/transition.hpp"
#include "tfddrl/nn/adam.hpp"
#include "tfddrl/nn/network.hpp"
#include "tfddrl/replay/prioritized_buffer.hpp"
#include "tfddrl/vtrace/vtrace.hpp"

namespace tfddrl::agent {

struct LearnerConfig {
  std::size_t n = 16;     // trajectory length
  std::size_t draws = 8;  // X, start indices sampled per trajectory
  double lr = 1e-3;
  double gamma = 0.99;
  double c_bar = 1.0;
  double rho_bar = 1.0;
  nn::LossWeights loss;
  nn::AdamConfig adam;
  // alpha, beta0, epsilon and the beta schedule length. The capacity is
  // replaced by the trajectory length.
  replay::PERConfig per;
  bool prioritized = true;  // false draws start indices uniformly with weight 1

  // Throws ParameterError.
  void validate() const;
  vtrace::VTraceConfig vtrace() const { return {gamma, c_bar, rho_bar}; }
};

// Network outputs along one trajectory and the V-trace quantities derived
// from them. Index t < n refers to transition t; values has n + 1 entries.
struct TrajectoryEvaluation {
  std::vector<double> values;
  std::vector<double> target_probs;  // pi(a_t | s_t)
  std::vector<double> discounts;     // 0 after an application boundary
  vtrace::VTraceResult vtrace;
};

TrajectoryEvaluation evaluate_trajectory(const nn::Network& net, std::span<const double> params,
                                         const mdp::Trajectory& trajectory,
                                         const vtrace::VTraceConfig& config);

struct LossComputation {
  nn::LossReport report;  // weighted sums over the samples
  std::vector<nn::GradientSample> samples;
  std::vector<double> deltas;  // V-trace delta of each sampled start index
};

// Builds one gradient sample per start index (trailing window, V-trace
// target, policy-gradient advantage, truncated ratio, IS weight) and
// evaluates the loss on them.
LossComputation compute_losses(const nn::Network& net, std::span<const double> params,
                               const mdp::Trajectory& trajectory,
                               const TrajectoryEvaluation& evaluation,
                               std::span<const std::size_t> indices,
                               std::span<const double> is_weights,
                               const nn::LossWeights& weights);

struct UpdateMetrics {
  std::size_t trajectories = 0;
  std::size_t samples = 0;
  double mean_reward = 0.0;  // over every transition of the batch
  // Per-sample means of the IS-weighted loss components.
  double loss_value = 0.0;
  double loss_policy = 0.0;
  double loss_entropy = 0.0;
  double loss_total = 0.0;
  double mean_abs_delta = 0.0;
  double beta = 1.0;
};

struct UpdateResult {
  nn::ParameterSet params;
  nn::AdamState adam;
  UpdateMetrics metrics;
};

// One learner iteration: per trajectory, draw X start indices by priority,
// accumulate the IS-weighted gradients, take one Adam step, and refresh the
// sampled priorities to |delta| (written back into the trajectories). The
// returned parameters carry version + 1. A NumericError aborts the whole
// iteration; the inputs are left untouched.
UpdateResult learner_update(const nn::Network& net, const nn::ParameterSet& params,
                            const nn::AdamState& adam, std::span<mdp::Trajectory> batch,
                            const LearnerConfig& config, std::size_t iteration,
                            std::mt19937_64& rng);

// Owns the parameters, optimizer state and sampling rng of the single learner.
class Learner {
 public:
  Learner(nn::Network net, LearnerConfig config, std::uint64_t seed);
  Learner(nn::Network net, LearnerConfig config, nn::ParameterSet initial, std::uint64_t seed);

  const nn::Network& network() const { return net_; }
  const LearnerConfig& config() const { return config_; }
  const nn::ParameterSet& params() const { return params_; }
  std::size_t iteration() const { return iteration_; }

  UpdateMetrics update(std::span<mdp::Trajectory> batch);

 private:
  nn::Network net_;
  LearnerConfig config_;
  nn::ParameterSet params_;
  nn::AdamState adam_;
  std::mt19937_64 rng_;
  std::size_t iteration_ = 0;
};

}  // namespace tfddrl::agent
