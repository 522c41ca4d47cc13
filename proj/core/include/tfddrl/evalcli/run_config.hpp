#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "tfddrl/evalcli/sco.hpp"
#include "tfddrl/runtime/training.hpp"

namespace tfddrl::evalcli {

// Inclusive range of preset_workload seeds; each seed yields one application
// of every preset kind.
struct PresetRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

workload::WorkloadTrace preset_range(const PresetRange& range);

// A training run as described by a JSON config file. env, workload and
// eval_apps of `training` are left for the caller to fill.
struct RunConfig {
  runtime::TrainingConfig training;
  PresetRange training_presets{1, 50};
  PresetRange eval_presets{1000, 1004};
  ScoOptions sco;
  bool per_schedule_explicit = false;  // per.total_iterations given in the file
};

RunConfig default_run_config();
// Keys absent from the file keep their defaults; unknown keys are rejected
// with ParameterError so typos do not pass silently.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// TFDDRL_PORT, TFDDRL_QUEUE_DEPTH, TFDDRL_TRANSPORT and TFDDRL_ACTORS.
// `getenv` is injectable for tests.
void apply_env_overrides(runtime::TrainingConfig& config,
                         const std::function<const char*(const char*)>& getenv);

// Anneals beta over the run unless the file fixed the schedule.
void finalize(RunConfig& config);

}  // namespace tfddrl::evalcli
