#include "tfddrl/agent/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::agent {

void LearnerConfig::validate() const {
  if (n == 0) throw ParameterError("trajectory length n must be at least 1");
  if (draws == 0) throw ParameterError("update draws X must be at least 1");
  if (!(lr > 0.0)) throw ParameterError("learning rate must be positive");
  if (loss.value < 0.0 || loss.policy < 0.0 || loss.entropy < 0.0) {
    throw ParameterError("loss weights must be non-negative");
  }
  vtrace().validate();
  per.validate();
}

TrajectoryEvaluation evaluate_trajectory(const nn::Network& net, std::span<const double> params,
                                         const mdp::Trajectory& trajectory,
                                         const vtrace::VTraceConfig& config) {
  const std::size_t n = trajectory.size();
  if (n == 0) throw PreconditionError("empty trajectory");
  const std::size_t k = net.config().context;
  const auto states = trajectory.states();

  TrajectoryEvaluation ev;
  ev.values.resize(n + 1);
  ev.target_probs.resize(n);
  ev.discounts.resize(n);
  std::vector<double> rewards(n), behavior(n);
  for (std::size_t t = 0; t <= n; ++t) {
    const std::size_t begin = trajectory.window_begin(t, k);
    const auto window = std::span(states).subspan(begin, t + 1 - begin);
    const auto& mask = t < n ? trajectory.transitions[t].mask : trajectory.transitions[n - 1].next_mask;
    const auto fwd = net.forward(params, window, mask);
    ev.values[t] = fwd.value;
    if (t < n) {
      const auto& tr = trajectory.transitions[t];
      ev.target_probs[t] = fwd.probs[tr.action];
      ev.discounts[t] = tr.app_boundary ? 0.0 : config.gamma;
      rewards[t] = tr.reward;
      behavior[t] = tr.behavior_prob;
    }
  }
  ev.vtrace = vtrace::vtrace(rewards, std::span(ev.values).first(n), ev.values[n], ev.target_probs,
                             behavior, config, ev.discounts);
  return ev;
}

LossComputation compute_losses(const nn::Network& net, std::span<const double> params,
                               const mdp::Trajectory& trajectory,
                               const TrajectoryEvaluation& evaluation,
                               std::span<const std::size_t> indices,
                               std::span<const double> is_weights,
                               const nn::LossWeights& weights) {
  if (indices.size() != is_weights.size()) {
    throw ShapeError("start indices and IS weights differ in length");
  }
  const std::size_t k = net.config().context;
  const auto states = trajectory.states();
  LossComputation out;
  out.samples.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t x = indices[i];
    if (x >= trajectory.size()) throw ReferenceError("start index outside the trajectory");
    const auto& tr = trajectory.transitions[x];
    const std::size_t begin = trajectory.window_begin(x, k);
    nn::GradientSample s;
    s.window.assign(states.begin() + static_cast<std::ptrdiff_t>(begin),
                    states.begin() + static_cast<std::ptrdiff_t>(x + 1));
    s.mask = tr.mask;
    s.action = tr.action;
    s.value_target = evaluation.vtrace.targets[x];
    s.advantage = evaluation.vtrace.pg_advantages[x];
    s.rho = evaluation.vtrace.rhos[x];
    s.is_weight = is_weights[i];
    out.samples.push_back(std::move(s));
    out.deltas.push_back(evaluation.vtrace.deltas[x]);
  }
  out.report = net.evaluate_loss(params, out.samples, weights);
  return out;
}

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite ") + what);
  }
}

}  // namespace

UpdateResult learner_update(const nn::Network& net, const nn::ParameterSet& params,
                            const nn::AdamState& adam, std::span<mdp::Trajectory> batch,
                            const LearnerConfig& config, std::size_t iteration,
                            std::mt19937_64& rng) {
  config.validate();
  if (batch.empty()) throw PreconditionError("learner batch is empty");
  const auto vcfg = config.vtrace();
  const double beta = config.per.beta(iteration);

  UpdateResult res{params, adam, {}};
  res.metrics.beta = beta;
  std::vector<double> grad(params.values.size());
  std::vector<std::vector<std::pair<std::size_t, double>>> refresh(batch.size());
  double reward_sum = 0.0, delta_sum = 0.0;
  std::size_t transitions = 0;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& traj = batch[b];
    try {
      const auto ev = evaluate_trajectory(net, res.params.values, traj, vcfg);

      std::vector<std::size_t> indices(config.draws);
      std::vector<double> weights(config.draws, 1.0);
      if (config.prioritized) {
        replay::PERConfig pc = config.per;
        pc.capacity = traj.size();
        replay::PrioritizedBuffer<std::size_t> buffer(pc);
        for (std::size_t t = 0; t < traj.size(); ++t) {
          buffer.update_priority(buffer.push(t, 0.0), traj.transitions[t].priority);
        }
        const auto drawn = buffer.sample(config.draws, beta, rng);
        for (std::size_t i = 0; i < drawn.size(); ++i) {
          indices[i] = buffer.get(drawn[i].handle);
          weights[i] = drawn[i].weight;
        }
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, traj.size() - 1);
        for (auto& x : indices) x = pick(rng);
      }

      auto losses = compute_losses(net, res.params.values, traj, ev, indices, weights, config.loss);
      std::fill(grad.begin(), grad.end(), 0.0);
      net.accumulate_gradients(res.params.values, losses.samples, config.loss, grad);
      require_finite(grad, "gradient");
      nn::adam_step(res.params.values, grad, res.adam, config.lr, config.adam);
      require_finite(res.params.values, "parameters after the Adam step");

      for (std::size_t i = 0; i < indices.size(); ++i) {
        refresh[b].emplace_back(indices[i], losses.deltas[i]);
        delta_sum += std::abs(losses.deltas[i]);
      }
      res.metrics.loss_value += losses.report.value;
      res.metrics.loss_policy += losses.report.policy;
      res.metrics.loss_entropy += losses.report.entropy;
      res.metrics.loss_total += losses.report.total;
      res.metrics.samples += indices.size();
    } catch (const NumericError& e) {
      throw NumericError("learner iteration " + std::to_string(iteration) + " aborted on trajectory " +
                         std::to_string(b) + ": " + e.what());
    }
    for (const auto& tr : traj.transitions) reward_sum += tr.reward;
    transitions += traj.size();
  }

  // Commit priorities only once the whole iteration succeeded.
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (const auto& [x, delta] : refresh[b]) {
      batch[b].transitions[x].priority = std::max(std::abs(delta), config.per.epsilon);
    }
  }
  res.params.version = params.version + 1;
  auto& m = res.metrics;
  m.trajectories = batch.size();
  m.mean_reward = reward_sum / static_cast<double>(transitions);
  const double s = static_cast<double>(m.samples);
  m.loss_value /= s;
  m.loss_policy /= s;
  m.loss_entropy /= s;
  m.loss_total /= s;
  m.mean_abs_delta = delta_sum / s;
  return res;
}

Learner::Learner(nn::Network net, LearnerConfig config, std::uint64_t seed)
    : Learner(net, config, net.initial_parameters(seed), seed) {}

Learner::Learner(nn::Network net, LearnerConfig config, nn::ParameterSet initial, std::uint64_t seed)
    : net_(std::move(net)),
      config_(std::move(config)),
      params_(std::move(initial)),
      adam_(params_.values.size()),
      rng_(seed ^ 0x9e3779b97f4a7c15ull) {
  config_.validate();
  if (params_.values.size() != net_.parameter_count()) {
    throw ShapeError("initial parameters do not match the network");
  }
}

UpdateMetrics Learner::update(std::span<mdp::Trajectory> batch) {
  auto res = learner_update(net_, params_, adam_, batch, config_, iteration_, rng_);
  params_ = std::move(res.params);
  adam_ = std::move(res.adam);
  ++iteration_;
  return res.metrics;
}

}  // namespace tfddrl::agent
