#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tfddrl/mdp/state.hpp"
#include "tfddrl/nn/config.hpp"

namespace tfddrl::nn {

// Window of states, oldest first; the last entry is the state being scored.
using StateWindow = std::span<const mdp::StateVector* const>;

struct ForwardOutput {
  std::vector<double> logits;
  std::vector<double> probs;  // masked softmax; masked entries are exactly 0
  double value = 0.0;
  // Per block, per window position: keys and values (heads * head_dim each).
  std::vector<std::vector<std::vector<double>>> keys;
  std::vector<std::vector<std::vector<double>>> values;
};

struct LossWeights {
  double value = 0.5;
  double policy = 1.0;
  double entropy = 0.01;
};

// One sampled start index with every quantity the loss treats as constant.
struct GradientSample {
  std::vector<const mdp::StateVector*> window;
  mdp::ActionMask mask;
  int action = 0;
  double value_target = 0.0;  // V-trace target
  double advantage = 0.0;     // r_x + gamma v_{x+1} - V(s_x)
  double rho = 1.0;           // truncated importance weight
  double is_weight = 1.0;     // prioritized-replay weight w_x
};

// Sums over the batch, each sample scaled by its is_weight.
struct LossReport {
  double value = 0.0;
  double policy = 0.0;
  double entropy = 0.0;  // sum of pi log pi (negative entropy)
  double total = 0.0;
};

// Fully connected ReLU trunk applied per window position, learned positional
// embeddings, gated attention blocks (pre-norm multi-head attention and
// position-wise MLP, each merged into the residual stream through a GRU-style
// gate), then linear policy and value heads on the last position.
class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const { return config_; }
  const ParameterLayout& layout() const { return layout_; }
  std::size_t parameter_count() const { return layout_.size(); }

  ParameterSet initial_parameters(std::uint64_t seed) const;

  // Throws NumericError on non-finite parameters, ShapeError on bad inputs.
  ForwardOutput forward(std::span<const double> params, StateWindow window,
                        const mdp::ActionMask& mask) const;

  // Adds the gradient of the total loss to `grad`. Throws NumericError naming
  // the layer when an intermediate becomes non-finite.
  LossReport accumulate_gradients(std::span<const double> params,
                                  std::span<const GradientSample> batch,
                                  const LossWeights& weights, std::span<double> grad) const;

  // Loss only; used by finite-difference checks and descent tests.
  LossReport evaluate_loss(std::span<const double> params, std::span<const GradientSample> batch,
                           const LossWeights& weights) const;

  // Attention-block output of every window position after the final block
  // (trunk output when there are no blocks). Exposed for structural tests.
  std::vector<std::vector<double>> encode_window(std::span<const double> params,
                                                 StateWindow window) const;

 private:
  struct Dense {
    std::size_t w = 0, b = 0, in = 0, out = 0;
  };
  struct Norm {
    std::size_t gamma = 0, beta = 0;
  };
  struct Gate {
    std::size_t wr = 0, ur = 0, wz = 0, uz = 0, wg = 0, ug = 0, bg = 0;
  };
  struct Block {
    Norm ln1;
    Dense q, k, v, o;
    Gate gate1;
    Norm ln2;
    Dense mlp1, mlp2;
    Gate gate2;
  };
  struct Tape;

  Dense add_dense(const std::string& name, std::size_t in, std::size_t out);
  Gate add_gate(const std::string& name);
  void run_forward(std::span<const double> p, StateWindow window, Tape& tape) const;
  void run_backward(std::span<const double> p, const Tape& tape, std::span<const double> d_last,
                    std::span<double> grad) const;

  NetworkConfig config_;
  ParameterLayout layout_;
  std::vector<Dense> trunk_;
  std::size_t positional_ = 0;
  std::vector<Block> blocks_;
  Dense policy_head_;
  Dense value_head_;
};

// Masked softmax. An all-false mask is rejected with PreconditionError.
std::vector<double> masked_softmax(std::span<const double> logits, const mdp::ActionMask& mask);

}  // namespace tfddrl::nn
