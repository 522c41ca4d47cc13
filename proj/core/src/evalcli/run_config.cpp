#include "tfddrl/evalcli/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tfddrl/errors.hpp"
#include "tfddrl/workload/generator.hpp"

namespace tfddrl::evalcli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParameterError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ParameterError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

PresetRange read_range(const json& j, const std::string& where) {
  check_keys(j, where, {"preset_seeds"});
  const auto seeds = j.at("preset_seeds").get<std::vector<std::uint64_t>>();
  if (seeds.size() != 2 || seeds[0] > seeds[1]) throw ParameterError(where + ".preset_seeds must be [first, last]");
  return {seeds[0], seeds[1]};
}

nn::NetworkConfig read_network(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "desk") return nn::NetworkConfig::desk(0, 0);
    if (name == "full") return nn::NetworkConfig::full(0, 0);
    throw ParameterError("unknown network preset '" + name + "'");
  }
  check_keys(j, "network", {"preset", "fc_units", "tf_units", "heads", "head_dim", "mlp_dim", "context", "gate_bias"});
  nn::NetworkConfig n = j.contains("preset") ? read_network(j.at("preset")) : nn::NetworkConfig::desk(0, 0);
  read(j, "fc_units", n.fc_units);
  read(j, "tf_units", n.tf_units);
  read(j, "heads", n.heads);
  read(j, "head_dim", n.head_dim);
  read(j, "mlp_dim", n.mlp_dim);
  read(j, "context", n.context);
  read(j, "gate_bias", n.gate_bias);
  return n;
}

void read_learner(const json& j, agent::LearnerConfig& l, bool& per_explicit) {
  check_keys(j, "learner", {"n", "draws", "lr", "gamma", "c_bar", "rho_bar", "loss", "adam", "per", "prioritized"});
  read(j, "n", l.n);
  read(j, "draws", l.draws);
  read(j, "lr", l.lr);
  read(j, "gamma", l.gamma);
  read(j, "c_bar", l.c_bar);
  read(j, "rho_bar", l.rho_bar);
  read(j, "prioritized", l.prioritized);
  if (j.contains("loss")) {
    const auto& k = j.at("loss");
    check_keys(k, "learner.loss", {"value", "policy", "entropy"});
    read(k, "value", l.loss.value);
    read(k, "policy", l.loss.policy);
    read(k, "entropy", l.loss.entropy);
  }
  if (j.contains("adam")) {
    const auto& k = j.at("adam");
    check_keys(k, "learner.adam", {"beta1", "beta2", "eps"});
    read(k, "beta1", l.adam.beta1);
    read(k, "beta2", l.adam.beta2);
    read(k, "eps", l.adam.eps);
  }
  if (j.contains("per")) {
    const auto& k = j.at("per");
    check_keys(k, "learner.per", {"alpha", "beta0", "epsilon", "total_iterations"});
    read(k, "alpha", l.per.alpha);
    read(k, "beta0", l.per.beta0);
    read(k, "epsilon", l.per.epsilon);
    if (k.contains("total_iterations")) {
      per_explicit = true;
      read(k, "total_iterations", l.per.total_iterations);
    }
  }
}

runtime::ExecutionMode parse_mode(const std::string& s) {
  if (s == "auto") return runtime::ExecutionMode::kAuto;
  if (s == "synchronous") return runtime::ExecutionMode::kSynchronous;
  if (s == "threaded") return runtime::ExecutionMode::kThreaded;
  throw ParameterError("unknown execution mode '" + s + "'");
}

runtime::Transport parse_transport(const std::string& s) {
  if (s == "inprocess") return runtime::Transport::kInProcess;
  if (s == "tcp") return runtime::Transport::kTcp;
  throw ParameterError("unknown transport '" + s + "'");
}

std::uint64_t parse_count(const char* name, const char* text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != std::string(text).size() || v < 0) throw std::invalid_argument(text);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ParameterError(std::string(name) + " must be a non-negative integer, got '" + text + "'");
  }
}

}  // namespace

workload::WorkloadTrace preset_range(const PresetRange& range) {
  workload::WorkloadTrace out;
  for (std::uint64_t s = range.first; s <= range.last; ++s) {
    for (auto& app : workload::preset_workload({}, s, static_cast<int>(out.apps.size())).apps) {
      out.apps.push_back(std::move(app));
    }
  }
  return out;
}

RunConfig default_run_config() {
  RunConfig c;
  c.training.network = nn::NetworkConfig::desk(0, 0);
  c.training.eval_every = 25;
  c.training.checkpoint_every = 50;
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig c = default_run_config();
  try {
    const json j = json::parse(json_text);
    check_keys(j, "config", {"network", "learner", "reward_mode", "runtime", "training_workload",
                             "eval_workload", "sco", "iterations", "actors", "seed"});
    auto& t = c.training;
    if (j.contains("network")) t.network = read_network(j.at("network"));
    if (j.contains("learner")) read_learner(j.at("learner"), t.learner, c.per_schedule_explicit);
    if (j.contains("reward_mode")) {
      const auto m = j.at("reward_mode").get<std::string>();
      if (m == "assume_on_critical_path") {
        t.env_options.reward_mode = mdp::RewardMode::kAssumeOnCriticalPath;
      } else if (m == "running_critical_path_gate") {
        t.env_options.reward_mode = mdp::RewardMode::kRunningCriticalPathGate;
      } else {
        throw ParameterError("unknown reward_mode '" + m + "'");
      }
    }
    read(j, "iterations", t.iterations);
    read(j, "actors", t.actor_count);
    read(j, "seed", t.seed);
    if (j.contains("runtime")) {
      const auto& r = j.at("runtime");
      check_keys(r, "runtime", {"min_batch", "queue_depth", "forced_staleness", "mode", "transport", "port",
                                "checkpoint_every", "eval_every"});
      read(r, "min_batch", t.min_batch);
      read(r, "queue_depth", t.queue_depth);
      read(r, "forced_staleness", t.forced_staleness);
      read(r, "port", t.port);
      read(r, "checkpoint_every", t.checkpoint_every);
      read(r, "eval_every", t.eval_every);
      if (r.contains("mode")) t.mode = parse_mode(r.at("mode").get<std::string>());
      if (r.contains("transport")) t.transport = parse_transport(r.at("transport").get<std::string>());
    }
    if (j.contains("training_workload")) c.training_presets = read_range(j.at("training_workload"), "training_workload");
    if (j.contains("eval_workload")) c.eval_presets = read_range(j.at("eval_workload"), "eval_workload");
    if (j.contains("sco")) {
      const auto& s = j.at("sco");
      check_keys(s, "sco", {"iterations", "apps_per_iteration"});
      read(s, "iterations", c.sco.iterations);
      read(s, "apps_per_iteration", c.sco.apps_per_iteration);
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void apply_env_overrides(runtime::TrainingConfig& config,
                         const std::function<const char*(const char*)>& getenv) {
  if (const char* v = getenv("TFDDRL_PORT")) {
    const auto port = parse_count("TFDDRL_PORT", v);
    if (port > 65535) throw ParameterError("TFDDRL_PORT out of range");
    config.port = static_cast<std::uint16_t>(port);
  }
  if (const char* v = getenv("TFDDRL_QUEUE_DEPTH")) config.queue_depth = parse_count("TFDDRL_QUEUE_DEPTH", v);
  if (const char* v = getenv("TFDDRL_ACTORS")) config.actor_count = parse_count("TFDDRL_ACTORS", v);
  if (const char* v = getenv("TFDDRL_TRANSPORT")) config.transport = parse_transport(v);
}

void finalize(RunConfig& config) {
  if (!config.per_schedule_explicit) config.training.learner.per.total_iterations = config.training.iterations;
}

}  // namespace tfddrl::evalcli
