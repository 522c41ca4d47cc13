#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tfddrl/evalcli/analysis.hpp"

namespace tfddrl::evalcli {

// One parsed row of a run's metrics.csv.
struct MetricsRow {
  std::size_t iteration = 0;
  std::size_t envelopes = 0;
  double mean_reward = 0.0;
  double loss_value = 0.0;
  double loss_policy = 0.0;
  double loss_entropy = 0.0;
  double loss_total = 0.0;
  std::uint64_t policy_version = 0;
  double mean_lag = 0.0;
  std::uint64_t max_lag = 0;
  double wall_clock = 0.0;
  std::optional<double> eval_j, eval_t, eval_e, eval_f;
};

struct RunData {
  std::string name;  // directory name, used as the technique label
  std::filesystem::path dir;
  std::vector<MetricsRow> rows;
  std::vector<double> sco_samples;  // from sco.csv when present
};

// Throws IoError naming the file and line. Iterations must strictly increase.
std::vector<MetricsRow> parse_metrics(const std::string& text, const std::string& source);
// Throws IoError naming the directory when it holds no metrics.csv.
RunData load_run(const std::filesystem::path& dir);

// SCO samples, one per line under a "seconds" header.
void save_sco_samples(const std::filesystem::path& path, const std::vector<double>& samples);

struct ReportOptions {
  std::vector<EmissionMix> mixes;
  std::optional<double> threshold;  // J* for the speedup table
  double level = 0.95;
};

struct ReportOutcome {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> errors;  // one entry per run directory that failed
};

// Writes costs.csv (eval J, T, E, F per iteration), summary.csv (final value
// per technique and metric), ghe.csv, speedup.csv (first run is the
// reference; needs a threshold), sco.csv and one SVG chart per cost metric.
// Runs that fail to load are listed in errors and skipped; IoError when none
// loads.
ReportOutcome write_report(const std::vector<std::filesystem::path>& run_dirs,
                           const std::filesystem::path& out_dir, const ReportOptions& options);

}  // namespace tfddrl::evalcli
