#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>
#include <random>

#include "tfddrl/errors.hpp"
#include "tfddrl/nn/adam.hpp"
#include "tfddrl/nn/checkpoint.hpp"
#include "tfddrl/nn/grad_check.hpp"
#include "tfddrl/nn/network.hpp"

using namespace tfddrl;
using namespace tfddrl::nn;

namespace {

struct Window {
  std::vector<std::unique_ptr<mdp::StateVector>> owned;
  std::vector<const mdp::StateVector*> ptrs;
  void add(std::vector<double> v) {
    owned.push_back(std::make_unique<mdp::StateVector>(std::move(v), 1));
    ptrs.push_back(owned.back().get());
  }
};

Window random_window(std::size_t len, std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Window w;
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = u(rng);
    w.add(v);
  }
  return w;
}

NetworkConfig tiny(std::size_t in = 5, std::size_t actions = 3) {
  NetworkConfig c;
  c.input_dim = in;
  c.action_count = actions;
  c.fc_units = {6, 4};
  c.tf_units = 1;
  c.heads = 2;
  c.head_dim = 2;
  c.mlp_dim = 3;
  c.context = 3;
  return c;
}

}  // namespace

TEST(Network, SoftmaxNormalizedAndMasked) {
  std::mt19937_64 rng(1);
  Network net(NetworkConfig::desk(7, 4));
  const auto p = net.initial_parameters(3);
  auto w = random_window(5, 7, rng);
  const auto out = net.forward(p.values, w.ptrs, {1, 0, 1, 1});
  EXPECT_EQ(out.logits.size(), 4u);
  EXPECT_EQ(out.probs[1], 0.0);
  EXPECT_NEAR(std::accumulate(out.probs.begin(), out.probs.end(), 0.0), 1.0, 1e-9);
  EXPECT_EQ(out.keys.size(), 1u);
  EXPECT_EQ(out.keys[0].size(), 5u);
  EXPECT_EQ(out.keys[0][0].size(), 16u);

  const auto two = net.forward(p.values, std::span(w.ptrs).first(2), {1, 0, 0, 0});
  EXPECT_EQ(two.probs[0], 1.0);
}

TEST(Network, HandComputedTrunk) {
  NetworkConfig c;
  c.input_dim = 2;
  c.action_count = 2;
  c.fc_units = {3};
  c.tf_units = 0;
  Network net(c);
  std::vector<double> p(net.parameter_count(), 0.0);
  const auto& w = net.layout().find("trunk0.w");
  std::fill_n(p.begin() + w.offset, w.size, 1.0);
  Window win;
  win.add({0.2, 0.3});
  win.add({-4.0, -4.0});
  const auto rep = net.encode_window(p, win.ptrs);
  ASSERT_EQ(rep.size(), 1u);  // no attention: only the newest state
  // 1*(-4) + 1*(-4) = -8 before the rectifier.
  EXPECT_EQ(rep[0], (std::vector<double>{0.0, 0.0, 0.0}));
  Window one;
  one.add({0.2, 0.3});
  EXPECT_EQ(net.encode_window(p, one.ptrs)[0], (std::vector<double>{0.5, 0.5, 0.5}));
}

TEST(Network, Deterministic) {
  std::mt19937_64 rng(2);
  Network net(NetworkConfig::desk(9, 3));
  const auto p = net.initial_parameters(4);
  auto w = random_window(8, 9, rng);
  const auto a = net.forward(p.values, w.ptrs, {1, 1, 1});
  const auto b = net.forward(p.values, w.ptrs, {1, 1, 1});
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(net.initial_parameters(4), p);
}

TEST(Network, RejectsBadInputs) {
  std::mt19937_64 rng(2);
  Network net(tiny());
  auto p = net.initial_parameters(1);
  auto w = random_window(4, 5, rng);
  EXPECT_THROW(net.forward(p.values, w.ptrs, {1, 1, 1}), ShapeError);  // longer than K
  EXPECT_THROW(net.forward(p.values, {}, {1, 1, 1}), ShapeError);
  auto bad = random_window(1, 4, rng);
  EXPECT_THROW(net.forward(p.values, bad.ptrs, {1, 1, 1}), ShapeError);
  p.values[3] = std::nan("");
  EXPECT_THROW(net.forward(p.values, std::span(w.ptrs).first(2), {1, 1, 1}), NumericError);
  p.values[3] = 0.0;
  EXPECT_THROW(net.forward(p.values, std::span(w.ptrs).first(2), {0, 0, 0}), PreconditionError);
  NetworkConfig c = tiny();
  c.fc_units.clear();
  EXPECT_THROW(Network{c}, ParameterError);
}

TEST(Network, OverflowNamesLayer) {
  std::mt19937_64 rng(2);
  Network net(tiny());
  auto p = net.initial_parameters(1);
  const auto& w = net.layout().find("trunk0.w");
  std::fill_n(p.values.begin() + w.offset, w.size, 1e308);
  auto win = random_window(2, 5, rng);
  try {
    net.forward(p.values, win.ptrs, {1, 1, 1});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("trunk"), std::string::npos) << e.what();
  }
}

TEST(Network, PermutationInvariantWithoutPositions) {
  std::mt19937_64 rng(3);
  NetworkConfig c = NetworkConfig::desk(6, 3);
  c.context = 3;
  Network net(c);
  auto p = net.initial_parameters(5).values;
  auto win = random_window(3, 6, rng);
  std::vector<const mdp::StateVector*> swapped{win.ptrs[1], win.ptrs[0], win.ptrs[2]};
  const auto before = net.forward(p, win.ptrs, {1, 1, 1});
  const auto after = net.forward(p, swapped, {1, 1, 1});
  EXPECT_GT(std::abs(before.value - after.value), 1e-9);

  const auto& pos = net.layout().find("positional");
  std::fill_n(p.begin() + pos.offset, pos.size, 0.0);
  const auto a = net.forward(p, win.ptrs, {1, 1, 1});
  const auto b = net.forward(p, swapped, {1, 1, 1});
  EXPECT_NEAR(a.value, b.value, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.logits[i], b.logits[i], 1e-12);
}

TEST(Network, GatesStartNearIdentity) {
  std::mt19937_64 rng(6);
  for (double bias : {2.0, 8.0}) {
    NetworkConfig c = NetworkConfig::desk(6, 3);
    c.gate_bias = bias;
    Network net(c);
    NetworkConfig plain = c;
    plain.tf_units = 0;
    Network trunk_only(plain);
    auto p = net.initial_parameters(7).values;
    // Small sublayer weights; trunk, norms and gate biases untouched.
    for (const auto& s : net.layout().segments()) {
      const bool sublayer = s.name.rfind("block", 0) == 0 && s.name.find(".ln") == std::string::npos &&
                            s.name.find(".bg") == std::string::npos;
      if (sublayer || s.name == "positional") {
        for (std::size_t i = 0; i < s.size; ++i) p[s.offset + i] *= s.name == "positional" ? 0.0 : 1e-3;
      }
    }
    std::vector<double> q(trunk_only.parameter_count());
    std::copy_n(p.begin(), net.layout().find("trunk2.b").offset + 16, q.begin());
    auto win = random_window(4, 6, rng);
    const auto out = net.encode_window(p, win.ptrs).back();
    const auto in = trunk_only.encode_window(q, win.ptrs).back();
    double dev = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
      dev = std::max(dev, std::abs(out[i] - in[i]));
      scale = std::max(scale, std::abs(in[i]));
    }
    // Two gates each keep a share 1 - sigmoid(-bias) of the residual.
    const double keep = 1.0 / (1.0 + std::exp(-bias));
    EXPECT_LE(dev, (1.0 - keep * keep) * scale * 1.05 + 1e-3) << "bias " << bias;
    if (bias == 8.0) EXPECT_LT(dev, 0.01 * scale);
  }
}

TEST(Gradients, MatchFiniteDifferencesTiny) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = grad_check(tiny(), seed);
    EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " worst " << r.worst_segment << " " << r.worst_analytic << " vs " << r.worst_numeric;
    EXPECT_TRUE(r.passed);
    EXPECT_LT(r.parameters, 500u);
  }
}

TEST(Gradients, MatchFiniteDifferencesTwoBlocks) {
  NetworkConfig c = tiny();
  c.tf_units = 2;
  c.fc_units = {4};
  const auto r = grad_check(c, 9);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_segment;
}

TEST(Gradients, MatchFiniteDifferencesWithoutAttention) {
  NetworkConfig c = tiny();
  c.tf_units = 0;
  const auto r = grad_check(c, 4);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_segment;
}

TEST(Gradients, CorruptedHookIsCaught) {
  GradCheckOptions o;
  o.corrupt = [](std::span<double> g) { g[g.size() / 2] += 0.01; };
  const auto r = grad_check(tiny(), 1, o);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_rel_error, 1e-2);
}

TEST(Gradients, ZeroLossGivesZeroGradient) {
  std::mt19937_64 rng(8);
  Network net(tiny());
  const auto p = net.initial_parameters(2).values;
  auto win = random_window(2, 5, rng);
  GradientSample s;
  s.window = win.ptrs;
  s.mask = {1, 1, 1};
  std::vector<GradientSample> batch{s};
  std::vector<double> g(p.size(), 0.0);
  const auto r = net.accumulate_gradients(p, batch, {0.0, 0.0, 0.0}, g);
  EXPECT_EQ(r.total, 0.0);
  EXPECT_TRUE(std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; }));
  GradCheckOptions o;
  const auto check = grad_check(net, p, batch, {0.0, 0.0, 0.0}, o);
  EXPECT_EQ(check.max_rel_error, 0.0);
}

TEST(Gradients, ValueAtTargetGivesZeroValueGradient) {
  std::mt19937_64 rng(8);
  Network net(tiny());
  const auto p = net.initial_parameters(2).values;
  auto win = random_window(3, 5, rng);
  GradientSample s;
  s.window = win.ptrs;
  s.mask = {1, 1, 1};
  s.value_target = net.forward(p, win.ptrs, s.mask).value;
  std::vector<GradientSample> batch{s};
  std::vector<double> g(p.size(), 0.0);
  const auto r = net.accumulate_gradients(p, batch, {1.0, 0.0, 0.0}, g);
  EXPECT_EQ(r.value, 0.0);
  const auto& v = net.layout().find("value.w");
  for (std::size_t i = 0; i < v.size; ++i) EXPECT_EQ(g[v.offset + i], 0.0);
  EXPECT_TRUE(std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; }));
  EXPECT_EQ(g.size(), net.parameter_count());
}

TEST(Gradients, EntropyWithinBounds) {
  std::mt19937_64 rng(10);
  Network net(tiny(5, 4));
  for (int seed = 0; seed < 20; ++seed) {
    auto p = net.initial_parameters(seed).values;
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& x : p) x += n(rng);
    auto win = random_window(3, 5, rng);
    GradientSample s;
    s.window = win.ptrs;
    s.mask = {1, 1, 1, 1};
    std::vector<GradientSample> batch{s};
    const auto r = net.evaluate_loss(p, batch, {});
    EXPECT_GE(r.entropy, -std::log(4.0) - 1e-12);
    EXPECT_LE(r.entropy, 0.0);
    EXPECT_TRUE(std::isfinite(r.total));
  }
}

TEST(Adam, FirstStepIsLearningRate) {
  std::vector<double> p{0.5};
  std::vector<double> g{1.0};
  AdamState st(1);
  adam_step(p, g, st, 0.001);
  // m_hat = 1, v_hat = 1: update = lr / (1 + eps).
  EXPECT_NEAR(p[0] - 0.5, -0.001 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ZeroGradientKeepsParams) {
  std::vector<double> p{0.5, -2.0};
  std::vector<double> g{0.0, 0.0};
  AdamState st(2);
  adam_step(p, g, st, 0.01);
  EXPECT_EQ(p, (std::vector<double>{0.5, -2.0}));
}

TEST(Adam, DeterministicAndShapeChecked) {
  std::vector<double> a{1.0, 2.0}, b{1.0, 2.0};
  std::vector<double> g{0.3, -0.7};
  AdamState sa(2), sb(2);
  for (int i = 0; i < 5; ++i) {
    adam_step(a, g, sa, 0.01);
    adam_step(b, g, sb, 0.01);
  }
  EXPECT_EQ(a, b);
  std::vector<double> short_g{1.0};
  EXPECT_THROW(adam_step(a, short_g, sa, 0.01), ShapeError);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const auto cfg = NetworkConfig::desk(9, 3);
  Network net(cfg);
  auto p = net.initial_parameters(11);
  p.version = 42;
  auto bytes = encode_checkpoint(cfg, p);
  EXPECT_EQ(decode_checkpoint(cfg, bytes), p);

  const auto path = std::filesystem::temp_directory_path() / "tfddrl_ckpt_test.bin";
  save_checkpoint(path, cfg, p);
  EXPECT_EQ(load_checkpoint(path, cfg), p);
  std::filesystem::remove(path);

  auto flipped = bytes;
  flipped.back() ^= 0x01;
  EXPECT_THROW(decode_checkpoint(cfg, flipped), IoError);
  auto other = cfg;
  other.context = 4;
  EXPECT_THROW(decode_checkpoint(other, bytes), IoError);
  bytes.resize(bytes.size() - 8);
  EXPECT_THROW(decode_checkpoint(cfg, bytes), IoError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin", cfg), IoError);
}

TEST(Config, DeskAndFullSizes) {
  const auto desk = NetworkConfig::desk(39, 3);
  const auto full = NetworkConfig::full(39, 3);
  EXPECT_EQ(desk.fc_units, (std::vector<std::size_t>{32, 32, 16}));
  EXPECT_EQ(full.fc_units, (std::vector<std::size_t>{256, 256, 128}));
  EXPECT_EQ(full.tf_units, 2u);
  EXPECT_EQ(full.heads, 4u);
  EXPECT_EQ(full.head_dim, 32u);
  EXPECT_NE(desk.digest(), full.digest());
  Network a(desk), b(full);
  EXPECT_LT(a.parameter_count(), b.parameter_count());
}
