#include "tfddrl/evalcli/sco.hpp"

#include <chrono>
#include <random>

#include "tfddrl/agent/actor.hpp"
#include "tfddrl/errors.hpp"
#include "tfddrl/runtime/envelope.hpp"

namespace tfddrl::evalcli {

ScoResult measure_sco(const nn::Network& net, const nn::ParameterSet& params,
                      const envsim::EnvironmentSpec& env, const workload::WorkloadTrace& workload,
                      const ScoOptions& options, std::uint64_t seed, const mdp::EnvOptions& env_options) {
  if (options.iterations < 2) throw ParameterError("SCO needs at least two iterations");
  if (options.apps_per_iteration == 0) throw ParameterError("apps_per_iteration must be positive");
  mdp::SchedulingEnv senv(env, workload, env_options);
  std::mt19937_64 rng(seed);
  ScoResult r;
  r.samples.reserve(options.iterations);
  std::uint64_t id = 0;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    // Episode length covering the next applications exactly; the env always
    // sits at the start of an application here.
    agent::ActorOptions ao;
    ao.n = 0;
    for (std::size_t k = 0; k < options.apps_per_iteration; ++k) {
      ao.n += workload.apps[(senv.app_cursor() + k) % workload.apps.size()].size();
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto out = agent::actor_episode(senv, net, params, ao, rng);
    const auto envelope = runtime::make_envelope(id++, 0, std::move(out.trajectory));
    const auto t1 = std::chrono::steady_clock::now();
    if (envelope.trajectory.size() != ao.n) throw PreconditionError("short SCO episode");
    r.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  for (double s : r.samples) r.time_o += s;
  r.time_a = r.time_o / static_cast<double>(options.iterations);
  r.ci = t_interval(r.samples, options.level);
  return r;
}

}  // namespace tfddrl::evalcli
