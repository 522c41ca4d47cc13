#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "tfddrl/errors.hpp"
#include "tfddrl/workload/dag.hpp"
#include "tfddrl/workload/generator.hpp"
#include "tfddrl/workload/trace_io.hpp"

using namespace tfddrl;
using namespace tfddrl::workload;

namespace {

AppDag make_dag(int n, std::vector<std::tuple<int, int, double>> edges) {
  AppDag dag;
  for (int i = 0; i < n; ++i) dag.tasks.push_back({i, 0, 100.0, 0.1, {}});
  for (auto [a, b, bytes] : edges) dag.tasks[a].out_edges.push_back({b, bytes});
  return dag;
}

// Order is topological iff every edge goes forward in it.
bool respects_edges(const AppDag& dag, const std::vector<int>& order) {
  std::vector<int> pos(dag.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  for (const auto& t : dag.tasks) {
    for (const auto& e : t.out_edges) {
      if (pos[t.id] >= pos[e.successor]) return false;
    }
  }
  return order.size() == dag.size();
}

}  // namespace

TEST(ValidateAndOrder, ChainIsForced) {
  auto dag = make_dag(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  EXPECT_EQ(validate_and_order(dag), (std::vector<int>{0, 1, 2}));
}

TEST(ValidateAndOrder, DiamondBreaksTiesByIndex) {
  auto dag = make_dag(4, {{0, 2, 1.0}, {0, 1, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}});
  EXPECT_EQ(validate_and_order(dag), (std::vector<int>{0, 1, 2, 3}));
}

TEST(ValidateAndOrder, ReadySetPrefersSmallestId) {
  // 3 has no predecessors and must come before 1 only by index ordering rules.
  auto dag = make_dag(4, {{0, 1, 1.0}, {2, 1, 1.0}});
  EXPECT_EQ(validate_and_order(dag), (std::vector<int>{0, 2, 1, 3}));
}

TEST(ValidateAndOrder, DanglingEdgeIsReferenceError) {
  auto dag = make_dag(2, {{0, 5, 1.0}});
  EXPECT_THROW(validate_and_order(dag), ReferenceError);
}

TEST(ValidateAndOrder, CycleIsInvalidDag) {
  auto dag = make_dag(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
  EXPECT_THROW(validate_and_order(dag), InvalidDagError);
}

TEST(ValidateAndOrder, SelfLoopIsInvalidDag) {
  auto dag = make_dag(2, {{1, 1, 1.0}});
  EXPECT_THROW(validate_and_order(dag), InvalidDagError);
}

TEST(ValidateAndOrder, NonContiguousIdsRejected) {
  auto dag = make_dag(2, {});
  dag.tasks[1].id = 7;
  EXPECT_THROW(validate_and_order(dag), ReferenceError);
}

TEST(DagIndex, PredecessorsMirrorEdges) {
  auto dag = make_dag(4, {{0, 1, 5.0}, {0, 2, 6.0}, {1, 3, 7.0}, {2, 3, 8.0}});
  DagIndex idx(dag);
  ASSERT_EQ(idx.predecessors(3).size(), 2u);
  EXPECT_EQ(idx.predecessors(3)[0].predecessor, 1);
  EXPECT_DOUBLE_EQ(idx.predecessors(3)[1].bytes, 8.0);
  EXPECT_TRUE(idx.is_source(0));
  EXPECT_TRUE(idx.is_sink(3));
  EXPECT_FALSE(idx.is_sink(1));
}

TEST(Generator, SingleTaskHasNoEdges) {
  GeneratorParams p;
  p.task_count = 1;
  auto dag = generate_dag(p, 7);
  ASSERT_EQ(dag.size(), 1u);
  EXPECT_TRUE(dag.tasks[0].out_edges.empty());
}

TEST(Generator, DeterministicForSeed) {
  for (auto shape : {DagShape::kChain, DagShape::kDiamond, DagShape::kLayered}) {
    GeneratorParams p;
    p.task_count = 5;
    p.shape = shape;
    EXPECT_EQ(serialize_trace({{generate_dag(p, 11)}}), serialize_trace({{generate_dag(p, 11)}}));
  }
}

TEST(Generator, InvalidRangesRejected) {
  GeneratorParams p;
  p.cycles = {10.0, 5.0};
  EXPECT_THROW(generate_dag(p, 1), ParameterError);
  p = {};
  p.data = {0.0, 5.0};
  EXPECT_THROW(generate_dag(p, 1), ParameterError);
  p = {};
  p.task_count = 0;
  EXPECT_THROW(generate_dag(p, 1), ParameterError);
}

TEST(Generator, ThousandSeedsStayInRangeAndAcyclic) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    GeneratorParams p;
    p.task_count = 1 + static_cast<int>(seed % 8);
    p.shape = static_cast<DagShape>(seed % 3);
    if (p.shape == DagShape::kDiamond) p.task_count = std::min(p.task_count, p.max_fanout + 2);
    const auto dag = generate_dag(p, seed);
    ASSERT_EQ(dag.size(), static_cast<std::size_t>(p.task_count));
    const auto order = validate_and_order(dag);
    ASSERT_TRUE(respects_edges(dag, order));
    DagIndex idx(dag);
    int sources = 0, sinks = 0;
    for (const auto& t : dag.tasks) {
      EXPECT_GE(t.cycles, p.cycles.lo);
      EXPECT_LE(t.cycles, p.cycles.hi);
      EXPECT_GE(t.ram, p.ram.lo);
      EXPECT_LE(t.ram, p.ram.hi);
      for (const auto& e : t.out_edges) {
        EXPECT_GE(e.bytes, p.data.lo);
        EXPECT_LE(e.bytes, p.data.hi);
      }
      sources += idx.is_source(t.id);
      sinks += idx.is_sink(t.id);
    }
    EXPECT_GE(sources, 1);
    EXPECT_GE(sinks, 1);
  }
}

TEST(Presets, ShapesAndScaling) {
  PresetOptions o480;
  o480.jitter = 0.0;
  PresetOptions o240 = o480;
  o240.label = 240;
  for (auto kind : kAllPresets) {
    const auto big = make_preset(kind, 3, o480, 1);
    const auto small = make_preset(kind, 3, o240, 1);
    EXPECT_GE(big.size(), 3u);
    EXPECT_LE(big.size(), 8u);
    EXPECT_NO_THROW(validate_and_order(big));
    EXPECT_EQ(big.kind, to_string(kind));
    for (std::size_t i = 0; i < big.size(); ++i) {
      EXPECT_NEAR(small.tasks[i].cycles, big.tasks[i].cycles / 4.0, 1e-9);
      EXPECT_NEAR(small.tasks[i].ram, big.tasks[i].ram / 2.0, 1e-12);
    }
  }
}

TEST(Presets, WorkloadHasOneOfEach) {
  const auto trace = preset_workload({}, 5, 10);
  ASSERT_EQ(trace.apps.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(trace.apps[i].app_id, 10 + static_cast<int>(i));
  EXPECT_EQ(parse_preset("ocr"), PresetKind::kOcr);
  EXPECT_THROW(parse_preset("nope"), ParameterError);
}

TEST(TraceIo, RoundTrip) {
  const auto trace = preset_workload({}, 9);
  const auto back = parse_trace(serialize_trace(trace));
  ASSERT_EQ(back.apps.size(), trace.apps.size());
  for (std::size_t i = 0; i < trace.apps.size(); ++i) EXPECT_EQ(back.apps[i], trace.apps[i]);

  const auto path = std::filesystem::temp_directory_path() / "tfddrl_trace_roundtrip.json";
  save_trace(trace, path);
  EXPECT_EQ(load_trace(path).apps, trace.apps);
  std::filesystem::remove(path);
}

TEST(TraceIo, RejectsBadInput) {
  EXPECT_THROW(parse_trace("{not json"), IoError);
  EXPECT_THROW(parse_trace(R"({"apps":[{"app_id":0,"label":480,"tasks":[{"id":0,"cycles":0,"ram":0.1,"edges":[]}]}]})"),
               Error);
  EXPECT_THROW(parse_trace(R"({"apps":[{"app_id":0,"label":480,"tasks":[{"id":0,"cycles":5,"ram":0.1,"edges":[[1,0]]},{"id":1,"cycles":5,"ram":0.1,"edges":[]}]}]})"),
               ConstraintViolation);
  EXPECT_THROW(parse_trace(R"({"apps":[{"app_id":0,"label":480,"tasks":[{"id":0,"cycles":5,"ram":0.1,"edges":[[3,10]]}]}]})"),
               ReferenceError);
}
