// tfddrl: train, evaluate and analyse task schedulers from the command line.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tfddrl/agent/actor.hpp"
#include "tfddrl/errors.hpp"
#include "tfddrl/evalcli/analysis.hpp"
#include "tfddrl/evalcli/baselines.hpp"
#include "tfddrl/evalcli/report.hpp"
#include "tfddrl/evalcli/run_config.hpp"
#include "tfddrl/evalcli/sco.hpp"
#include "tfddrl/nn/checkpoint.hpp"
#include "tfddrl/runtime/training.hpp"
#include "tfddrl/workload/trace_io.hpp"

using namespace tfddrl;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

struct Common {
  std::string env_path;
  std::string workload_path;
  std::string config_path;
  std::string out;
  std::optional<std::size_t> actors;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
};

envsim::EnvironmentSpec load_env(const std::string& path) {
  return path.empty() ? envsim::reference_environment() : envsim::load_environment(path);
}

evalcli::RunConfig load_config(const Common& c) {
  auto rc = c.config_path.empty() ? evalcli::default_run_config() : evalcli::load_run_config(c.config_path);
  evalcli::apply_env_overrides(rc.training, [](const char* k) { return std::getenv(k); });
  if (c.actors) rc.training.actor_count = *c.actors;
  if (c.iterations) rc.training.iterations = *c.iterations;
  if (c.seed) rc.training.seed = *c.seed;
  evalcli::finalize(rc);
  return rc;
}

nn::NetworkConfig resolved_network(const evalcli::RunConfig& rc, const envsim::EnvironmentSpec& env) {
  nn::NetworkConfig n = rc.training.network;
  n.input_dim = mdp::state_dim(env.size());
  n.action_count = env.size();
  return n;
}

json eval_json(const runtime::EvalSummary& s) {
  return {{"mean_j", s.mean_j}, {"mean_t", s.mean_t}, {"mean_e", s.mean_e}, {"mean_f", s.mean_f},
          {"failed_apps", s.failed}};
}

int cmd_train(const Common& c) {
  auto rc = load_config(c);
  auto& t = rc.training;
  t.env = load_env(c.env_path);
  t.workload = c.workload_path.empty() ? evalcli::preset_range(rc.training_presets)
                                       : workload::load_trace(c.workload_path);
  t.eval_apps = evalcli::preset_range(rc.eval_presets).apps;
  t.out_dir = c.out.empty() ? "run" : c.out;
  t.stop = &g_stop;
  t.on_iteration = [](const runtime::IterationRecord& r) {
    if (r.eval) {
      std::cerr << "iteration " << r.iteration << " eval J " << r.eval->mean_j << " (" << r.wall_clock
                << " s)\n";
    }
    return true;
  };
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto result = runtime::run_training(t);

  const nn::Network net(resolved_network(rc, t.env));
  const auto sco = evalcli::measure_sco(net, result.params, t.env, t.workload, rc.sco, t.seed, t.env_options);
  evalcli::save_sco_samples(t.out_dir / "sco.csv", sco.samples);

  json out = {{"iterations", result.records.size()},
              {"policy_version", result.params.version},
              {"stopped_early", result.stopped_early},
              {"envelopes",
               {{"produced", result.counters.produced},
                {"consumed", result.counters.consumed},
                {"drained", result.counters.drained},
                {"rejected", result.counters.rejected},
                {"dropped", result.counters.dropped}}},
              {"actor_restarts", result.actor_restarts},
              {"sco", {{"time_a_s", sco.time_a}, {"ci_low_s", sco.ci.low}, {"ci_high_s", sco.ci.high}}},
              {"out", t.out_dir.string()}};
  if (!result.records.empty() && result.records.back().eval) out["eval"] = eval_json(*result.records.back().eval);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint) {
  auto rc = load_config(c);
  const auto env = load_env(c.env_path);
  const auto apps = c.workload_path.empty() ? evalcli::preset_range(rc.eval_presets).apps
                                            : workload::load_trace(c.workload_path).apps;
  const nn::Network net(resolved_network(rc, env));
  const auto params = nn::load_checkpoint(checkpoint, net.config());
  json per_app = json::array();
  for (const auto& dag : apps) {
    const auto r = agent::greedy_rollout(net, params, env, dag, rc.training.env_options);
    per_app.push_back({{"app_id", dag.app_id}, {"kind", dag.kind}, {"j", r.weighted}, {"failed", r.failed},
                       {"assignment", r.assignment.servers()}});
  }
  json out = eval_json(runtime::evaluate_policy(net, params, env, apps, rc.training.env_options));
  out["policy_version"] = params.version;
  out["apps"] = per_app;
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_baseline(const Common& c, const std::string& kind_name) {
  auto rc = load_config(c);
  const auto kind = evalcli::parse_baseline(kind_name);
  const auto env = load_env(c.env_path);
  const auto apps = c.workload_path.empty() ? evalcli::preset_range(rc.eval_presets).apps
                                            : workload::load_trace(c.workload_path).apps;
  const std::uint64_t seed = c.seed.value_or(rc.training.seed);
  json per_app = json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < apps.size(); ++i) {
    const auto r = evalcli::baseline_schedule(kind, apps[i], env, seed + i);
    total += r.cost.weighted;
    per_app.push_back({{"app_id", apps[i].app_id},
                       {"kind", apps[i].kind},
                       {"j", r.cost.weighted},
                       {"t", r.cost.response_time},
                       {"e", r.cost.energy},
                       {"f", r.cost.monetary},
                       {"assignment", r.assignment.servers()}});
  }
  json out = {{"baseline", std::string(evalcli::to_string(kind))},
              {"mean_j", apps.empty() ? 0.0 : total / static_cast<double>(apps.size())},
              {"apps", per_app}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_ghe(double energy_kwh, double energy_joules, const std::vector<std::string>& mixes) {
  double kwh = energy_kwh;
  if (energy_joules >= 0.0) kwh = energy_joules / evalcli::kJoulesPerKwh;
  json rows = json::array();
  for (const auto& path : mixes) {
    const auto mix = evalcli::load_emission_mix(path);
    rows.push_back({{"mix", mix.name}, {"energy_kwh", kwh}, {"ghe_kg_co2e", evalcli::ghe(kwh, mix)}});
  }
  std::cout << rows.dump(2) << '\n';
  return 0;
}

std::vector<evalcli::CurvePoint> curve_of(const std::string& run_dir) {
  const auto run = evalcli::load_run(run_dir);
  std::vector<evalcli::CurvePoint> c;
  for (const auto& r : run.rows) {
    if (r.eval_j) c.push_back({r.wall_clock, *r.eval_j});
  }
  return c;
}

int cmd_speedup(const std::string& reference, const std::string& candidate, double threshold) {
  const auto r = evalcli::speedup(curve_of(reference), curve_of(candidate), threshold);
  json out = {{"threshold", threshold}, {"reached", r.reached()}};
  out["time_reference_s"] = r.time_reference ? json(*r.time_reference) : json("not reached");
  out["time_candidate_s"] = r.time_candidate ? json(*r.time_candidate) : json("not reached");
  out["spu"] = r.spu ? json(*r.spu) : json("not reached");
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out_dir,
               const std::vector<std::string>& mixes, std::optional<double> threshold) {
  evalcli::ReportOptions opts;
  for (const auto& m : mixes) opts.mixes.push_back(evalcli::load_emission_mix(m));
  opts.threshold = threshold;
  std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
  const auto outcome = evalcli::write_report(dirs, out_dir.empty() ? "report" : out_dir, opts);
  json written = json::array();
  for (const auto& p : outcome.written) written.push_back(p.string());
  std::cout << json{{"written", written}, {"errors", outcome.errors}}.dump(2) << '\n';
  if (!outcome.errors.empty()) {
    std::cerr << json{{"error", {{"kind", "io"}, {"files", outcome.errors}}}}.dump() << '\n';
    return 1;
  }
  return 0;
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed actor-learner scheduling of DAG applications over edge and cloud servers"};
  app.require_subcommand(1);

  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--env", common.env_path, "environment JSON (default: built-in 3-server reference)");
    sub->add_option("--workload", common.workload_path, "workload trace JSON (default: presets from the config)");
    sub->add_option("--config", common.config_path, "run config JSON");
    sub->add_option("--actors", common.actors, "actor count");
    sub->add_option("--iterations", common.iterations, "learner iterations");
    sub->add_option("--seed", common.seed, "seed");
    sub->add_option("--out", common.out, "output directory");
  };

  auto* train = app.add_subcommand("train", "run the actor/learner loop; writes metrics.csv, checkpoint.bin, sco.csv");
  add_common(train);

  std::string checkpoint;
  auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  std::string kind = "greedy";
  auto* baseline = app.add_subcommand("baseline", "random, greedy or exhaustive-oracle schedules");
  add_common(baseline);
  baseline->add_option("--kind", kind, "random | greedy | oracle");

  double energy_kwh = 0.0, energy_joules = -1.0;
  std::vector<std::string> mixes;
  auto* ghe = app.add_subcommand("ghe", "greenhouse-gas emissions of an energy figure");
  auto* kwh_opt = ghe->add_option("--energy-kwh", energy_kwh, "energy in kWh");
  auto* j_opt = ghe->add_option("--energy-joules", energy_joules, "energy in joules");
  kwh_opt->excludes(j_opt);
  ghe->add_option("--mix", mixes, "emission mix JSON (repeatable)")->required();

  std::string reference, candidate;
  double threshold = 0.0;
  auto* speedup = app.add_subcommand("speedup", "ratio of wall-clock times to reach a weighted-cost threshold");
  speedup->add_option("--reference", reference, "reference run directory")->required();
  speedup->add_option("--candidate", candidate, "candidate run directory")->required();
  speedup->add_option("--threshold", threshold, "J* (required; a threshold is testbed-specific)")->required();

  std::vector<std::string> runs;
  std::string report_out;
  std::optional<double> report_threshold;
  std::vector<std::string> report_mixes;
  auto* report = app.add_subcommand("report", "CSV tables and SVG charts from run directories");
  report->add_option("runs", runs, "run directories")->required();
  report->add_option("--out", report_out, "output directory");
  report->add_option("--mix", report_mixes, "emission mix JSON (repeatable)");
  report->add_option("--threshold", report_threshold, "J* for the speedup table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*train) return cmd_train(common);
    if (*eval) return cmd_eval(common, checkpoint);
    if (*baseline) return cmd_baseline(common, kind);
    if (*ghe) return cmd_ghe(energy_kwh, energy_joules, mixes);
    if (*speedup) return cmd_speedup(reference, candidate, threshold);
    if (*report) return cmd_report(runs, report_out, report_mixes, report_threshold);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
