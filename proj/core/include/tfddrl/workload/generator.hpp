#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tfddrl/workload/dag.hpp"

namespace tfddrl::workload {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

enum class DagShape { kChain, kDiamond, kLayered };

DagShape parse_shape(std::string_view name);
std::string_view to_string(DagShape shape);

struct GeneratorParams {
  int task_count = 4;
  int max_fanout = 3;
  Range cycles{500.0, 3000.0};  // Mcycles
  Range data{1.0e5, 5.0e6};     // bytes per edge
  Range ram{0.05, 0.5};         // GB
  DagShape shape = DagShape::kLayered;
  int app_id = 0;
  int label = 480;
};

// Deterministic for a fixed (params, seed). Throws ParameterError on bad ranges.
AppDag generate_dag(const GeneratorParams& params, std::uint64_t seed);

// Synthetic stand-ins for the four camera/video applications. Shapes are
// fixed; cycle counts and data sizes scale with the resolution label
// (pixel count relative to 480) and receive a seeded multiplicative jitter.
enum class PresetKind { kFaceDetect, kColorTrack, kFaceEye, kOcr };

inline constexpr PresetKind kAllPresets[] = {
    PresetKind::kFaceDetect, PresetKind::kColorTrack, PresetKind::kFaceEye,
    PresetKind::kOcr};

std::string_view to_string(PresetKind kind);
PresetKind parse_preset(std::string_view name);

struct PresetOptions {
  int label = 480;
  double jitter = 0.15;  // relative half-width of the multiplicative jitter
};

AppDag make_preset(PresetKind kind, int app_id, const PresetOptions& options,
                   std::uint64_t seed);

// One application of each preset, in preset order, app ids starting at
// `first_app_id`.
WorkloadTrace preset_workload(const PresetOptions& options, std::uint64_t seed,
                              int first_app_id = 0);

}  // namespace tfddrl::workload
