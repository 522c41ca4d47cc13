#include "tfddrl/workload/generator.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::workload {
namespace {

double draw(std::mt19937_64& rng, const Range& r) {
  if (r.hi == r.lo) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

void check_range(const Range& r, const char* name, bool allow_zero) {
  const bool lo_ok = allow_zero ? r.lo >= 0.0 : r.lo > 0.0;
  if (!lo_ok || !(r.hi >= r.lo)) {
    throw ParameterError(std::string("invalid ") + name + " range [" +
                         std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
  }
}

void add_edge(AppDag& dag, int from, int to, double bytes) {
  for (const auto& e : dag.tasks[from].out_edges) {
    if (e.successor == to) return;
  }
  dag.tasks[from].out_edges.push_back({to, bytes});
}

void sort_edges(AppDag& dag) {
  for (auto& t : dag.tasks) {
    std::sort(t.out_edges.begin(), t.out_edges.end(),
              [](const Edge& a, const Edge& b) { return a.successor < b.successor; });
  }
}

struct TaskTemplate {
  double cycles;
  double ram;
};

struct EdgeTemplate {
  int from;
  int to;
  double bytes;
};

struct PresetTemplate {
  std::vector<TaskTemplate> tasks;
  std::vector<EdgeTemplate> edges;
};

// Magnitudes are artifact choices at label 480.
PresetTemplate preset_template(PresetKind kind) {
  switch (kind) {
    case PresetKind::kFaceDetect:
      return {{{300, 0.05}, {800, 0.2}, {3000, 0.6}, {400, 0.1}},
              {{0, 1, 2.0e6}, {1, 2, 1.5e6}, {2, 3, 2.0e5}}};
    case PresetKind::kColorTrack:
      return {{{300, 0.05}, {1500, 0.3}, {500, 0.1}},
              {{0, 1, 2.0e6}, {1, 2, 3.0e5}}};
    case PresetKind::kFaceEye:
      return {{{300, 0.05}, {800, 0.2}, {2500, 0.5}, {2000, 0.4}, {400, 0.1}},
              {{0, 1, 2.0e6}, {1, 2, 1.5e6}, {1, 3, 1.5e6}, {2, 4, 1.0e5}, {3, 4, 1.0e5}}};
    case PresetKind::kOcr:
      return {{{600, 0.1}, {1000, 0.2}, {3500, 0.7}, {3500, 0.7}, {2000, 0.5}, {300, 0.05}},
              {{0, 1, 3.0e6},
               {1, 2, 8.0e5},
               {1, 3, 8.0e5},
               {1, 4, 8.0e5},
               {2, 5, 5.0e4},
               {3, 5, 5.0e4},
               {4, 5, 5.0e4}}};
  }
  throw ParameterError("unknown preset");
}

}  // namespace

DagShape parse_shape(std::string_view name) {
  if (name == "chain") return DagShape::kChain;
  if (name == "diamond") return DagShape::kDiamond;
  if (name == "layered") return DagShape::kLayered;
  throw ParameterError("unknown DAG shape '" + std::string(name) + "'");
}

std::string_view to_string(DagShape shape) {
  switch (shape) {
    case DagShape::kChain: return "chain";
    case DagShape::kDiamond: return "diamond";
    case DagShape::kLayered: return "layered";
  }
  return "?";
}

AppDag generate_dag(const GeneratorParams& params, std::uint64_t seed) {
  if (params.task_count < 1) throw ParameterError("task_count must be >= 1");
  if (params.max_fanout < 1) throw ParameterError("max_fanout must be >= 1");
  check_range(params.cycles, "cycles", false);
  check_range(params.data, "data", false);
  check_range(params.ram, "ram", true);

  std::mt19937_64 rng(seed);
  const int n = params.task_count;
  AppDag dag;
  dag.app_id = params.app_id;
  dag.label = params.label;
  dag.kind = "generated-" + std::string(to_string(params.shape));
  dag.tasks.resize(n);
  for (int i = 0; i < n; ++i) {
    dag.tasks[i].id = i;
    dag.tasks[i].app_id = params.app_id;
    dag.tasks[i].cycles = draw(rng, params.cycles);
    dag.tasks[i].ram = draw(rng, params.ram);
  }

  switch (params.shape) {
    case DagShape::kChain:
      for (int i = 0; i + 1 < n; ++i) add_edge(dag, i, i + 1, draw(rng, params.data));
      break;
    case DagShape::kDiamond: {
      if (n <= 2) {
        for (int i = 0; i + 1 < n; ++i) add_edge(dag, i, i + 1, draw(rng, params.data));
        break;
      }
      if (n - 2 > params.max_fanout) {
        throw ParameterError("diamond with " + std::to_string(n) +
                             " tasks needs fan-out " + std::to_string(n - 2) +
                             " > max_fanout " + std::to_string(params.max_fanout));
      }
      for (int mid = 1; mid < n - 1; ++mid) {
        add_edge(dag, 0, mid, draw(rng, params.data));
        add_edge(dag, mid, n - 1, draw(rng, params.data));
      }
      break;
    }
    case DagShape::kLayered: {
      // Layer 0 is the single source; later layers draw a width in
      // [1, max_fanout] and connect every task to at least one task of the
      // previous layer, and every previous-layer task to some successor.
      std::vector<std::vector<int>> layers{{0}};
      int next = 1;
      while (next < n) {
        const int remaining = n - next;
        std::uniform_int_distribution<int> width_dist(1, std::min(params.max_fanout, remaining));
        const int width = width_dist(rng);
        std::vector<int> layer;
        for (int k = 0; k < width; ++k) layer.push_back(next++);
        const auto& prev = layers.back();
        for (int t : layer) {
          std::uniform_int_distribution<std::size_t> pick(0, prev.size() - 1);
          add_edge(dag, prev[pick(rng)], t, draw(rng, params.data));
          if (prev.size() > 1 && std::uniform_real_distribution<double>(0, 1)(rng) < 0.3) {
            add_edge(dag, prev[pick(rng)], t, draw(rng, params.data));
          }
        }
        for (int p : prev) {
          if (dag.tasks[p].out_edges.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, layer.size() - 1);
            add_edge(dag, p, layer[pick(rng)], draw(rng, params.data));
          }
        }
        layers.push_back(std::move(layer));
      }
      break;
    }
  }
  sort_edges(dag);
  return dag;
}

std::string_view to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::kFaceDetect: return "facedetect";
    case PresetKind::kColorTrack: return "colortrack";
    case PresetKind::kFaceEye: return "faceeye";
    case PresetKind::kOcr: return "ocr";
  }
  return "?";
}

PresetKind parse_preset(std::string_view name) {
  for (auto kind : kAllPresets) {
    if (to_string(kind) == name) return kind;
  }
  throw ParameterError("unknown preset '" + std::string(name) + "'");
}

AppDag make_preset(PresetKind kind, int app_id, const PresetOptions& options,
                   std::uint64_t seed) {
  if (options.label <= 0) throw ParameterError("label must be positive");
  if (options.jitter < 0.0 || options.jitter >= 1.0) {
    throw ParameterError("jitter must lie in [0, 1)");
  }
  const PresetTemplate tpl = preset_template(kind);
  const double pixel_scale =
      (options.label / 480.0) * (options.label / 480.0);
  const double ram_scale = options.label / 480.0;
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(kind) + 1)));
  const Range jitter{1.0 - options.jitter, 1.0 + options.jitter};

  AppDag dag;
  dag.app_id = app_id;
  dag.label = options.label;
  dag.kind = std::string(to_string(kind));
  dag.tasks.resize(tpl.tasks.size());
  for (std::size_t i = 0; i < tpl.tasks.size(); ++i) {
    auto& t = dag.tasks[i];
    t.id = static_cast<int>(i);
    t.app_id = app_id;
    t.cycles = tpl.tasks[i].cycles * pixel_scale * draw(rng, jitter);
    t.ram = tpl.tasks[i].ram * ram_scale;
  }
  for (const auto& e : tpl.edges) {
    add_edge(dag, e.from, e.to, e.bytes * pixel_scale * draw(rng, jitter));
  }
  sort_edges(dag);
  return dag;
}

WorkloadTrace preset_workload(const PresetOptions& options, std::uint64_t seed,
                              int first_app_id) {
  WorkloadTrace trace;
  int app_id = first_app_id;
  for (auto kind : kAllPresets) {
    trace.apps.push_back(make_preset(kind, app_id++, options, seed));
  }
  return trace;
}

}  // namespace tfddrl::workload
