#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <random>

#include "tfddrl/errors.hpp"
#include "tfddrl/replay/prioritized_buffer.hpp"

using namespace tfddrl;
using namespace tfddrl::replay;

namespace {

PERConfig cfg(std::size_t capacity, double alpha = 1.0) {
  PERConfig c;
  c.capacity = capacity;
  c.alpha = alpha;
  return c;
}

}  // namespace

TEST(SumTree, FindMatchesPrefixSums) {
  SumTree t(5);
  const double v[] = {1.0, 0.0, 2.0, 3.0, 0.5};
  for (int i = 0; i < 5; ++i) t.set(i, v[i]);
  EXPECT_DOUBLE_EQ(t.total(), 6.5);
  EXPECT_EQ(t.find(0.0), 0u);
  EXPECT_EQ(t.find(0.999), 0u);
  EXPECT_EQ(t.find(1.0), 2u);
  EXPECT_EQ(t.find(2.999), 2u);
  EXPECT_EQ(t.find(3.0), 3u);
  EXPECT_EQ(t.find(6.2), 4u);
  EXPECT_EQ(t.find(6.5), 4u);
  EXPECT_EQ(t.find(100.0), 4u);
  EXPECT_THROW(t.set(5, 1.0), PreconditionError);
}

TEST(Replay, PriorityFloor) {
  PrioritizedBuffer<int> b(cfg(4));
  const auto h0 = b.push(0, 0.0);
  const auto h1 = b.push(1, -0.3);
  EXPECT_EQ(b.priority(h0), 1e-6);
  EXPECT_DOUBLE_EQ(b.priority(h1), 0.3 + 1e-6);
  b.update_priority(h1, 0.0);
  EXPECT_EQ(b.priority(h1), 1e-6);
  b.update_priority(h1, 0.731);
  EXPECT_EQ(b.priority(h1), 0.731);
  b.update_priority(h1, -0.25);
  EXPECT_EQ(b.priority(h1), 0.25);
}

TEST(Replay, FifoEvictionAndStaleHandles) {
  PrioritizedBuffer<int> b(cfg(3));
  std::vector<Handle> h;
  for (int i = 0; i < 4; ++i) h.push_back(b.push(i, 1.0));
  EXPECT_EQ(b.size(), 3u);
  EXPECT_FALSE(b.contains(h[0]));
  EXPECT_THROW(b.get(h[0]), ReferenceError);
  EXPECT_EQ(b.get(h[3]), 3);
  EXPECT_FALSE(b.update_priority(h[0], 5.0));
  EXPECT_EQ(b.stale_updates(), 1u);
  std::mt19937_64 rng(1);
  for (const auto& e : b.sample(100, 1.0, rng)) EXPECT_NE(b.get(e.handle), 0);
}

TEST(Replay, ProbabilityExamples) {
  PrioritizedBuffer<int> b(cfg(8));
  const auto a = b.push(0, 1.0 - 1e-6);
  const auto c = b.push(1, 3.0 - 1e-6);
  EXPECT_NEAR(b.probability(a), 0.25, 1e-12);
  EXPECT_NEAR(b.probability(c), 0.75, 1e-12);
  b.set_alpha(0.0);
  EXPECT_NEAR(b.probability(a), 0.5, 1e-12);
  EXPECT_NEAR(b.probability(c), 0.5, 1e-12);
}

TEST(Replay, EmptySampleThrows) {
  PrioritizedBuffer<int> b(cfg(2));
  std::mt19937_64 rng(1);
  EXPECT_THROW(b.sample(1, 0.4, rng), PreconditionError);
}

TEST(Replay, WeightsNormalizedByBatchMax) {
  std::mt19937_64 rng(5);
  PrioritizedBuffer<int> b(cfg(16, 0.6));
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 16; ++i) b.push(i, u(rng));
  for (double beta : {0.0, 0.4, 0.7, 1.0}) {
    for (int rep = 0; rep < 50; ++rep) {
      const auto s = b.sample(8, beta, rng);
      double mx = 0.0;
      for (const auto& e : s) {
        EXPECT_GT(e.weight, 0.0);
        EXPECT_LE(e.weight, 1.0);
        mx = std::max(mx, e.weight);
      }
      EXPECT_EQ(mx, 1.0);
    }
  }
  PrioritizedBuffer<int> eq(cfg(4));
  for (int i = 0; i < 4; ++i) eq.push(i, 0.5);
  for (const auto& e : eq.sample(20, 1.0, rng)) EXPECT_EQ(e.weight, 1.0);
}

TEST(Replay, UpdatedPriorityShiftsFrequency) {
  PrioritizedBuffer<int> b(cfg(2));
  const auto a = b.push(0, 1.0);
  b.push(1, 1.0);
  b.update_priority(a, 3.0 * b.priority(a));
  std::mt19937_64 rng(17);
  const int n = 100000;
  int hits = 0;
  for (const auto& e : b.sample(n, 1.0, rng)) hits += e.handle == a;
  EXPECT_NEAR(static_cast<double>(hits) / (n - hits), 3.0, 0.1);
}

TEST(Replay, ChiSquaredGoodnessOfFit) {
  for (double alpha : {0.5, 1.0}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 3.0);
      const std::size_t k = 10;
      PrioritizedBuffer<int> b(cfg(k, alpha));
      std::vector<Handle> h;
      for (std::size_t i = 0; i < k; ++i) h.push_back(b.push(static_cast<int>(i), u(rng)));
      double z = 0.0;
      std::vector<double> p(k);
      for (std::size_t i = 0; i < k; ++i) z += p[i] = std::pow(b.priority(h[i]), alpha);
      const int n = 100000;
      std::vector<int> counts(k, 0);
      for (const auto& e : b.sample(n, 0.4, rng)) ++counts[e.slot];
      double chi2 = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double expect = n * p[i] / z;
        chi2 += (counts[i] - expect) * (counts[i] - expect) / expect;
      }
      const boost::math::chi_squared dist(static_cast<double>(k - 1));
      EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01)
          << "alpha " << alpha << " seed " << seed << " chi2 " << chi2;
    }
  }
}

TEST(Replay, BetaScheduleReachesOne) {
  PERConfig c;
  c.total_iterations = 200;
  double prev = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    const double b = c.beta(i);
    EXPECT_GE(b, prev);
    EXPECT_GE(b, c.beta0);
    EXPECT_LE(b, 1.0);
    prev = b;
  }
  EXPECT_EQ(c.beta(0), 0.4);
  EXPECT_EQ(c.beta(199), 1.0);
  EXPECT_EQ(c.beta(500), 1.0);
}

TEST(Replay, ConfigValidation) {
  PERConfig c;
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.alpha = -1.0;
  EXPECT_THROW(PrioritizedBuffer<int>{c}, ParameterError);
}
