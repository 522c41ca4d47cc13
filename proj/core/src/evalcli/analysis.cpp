#include "tfddrl/evalcli/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "tfddrl/errors.hpp"

namespace tfddrl::evalcli {

void EmissionMix::validate() const {
  if (sources.empty()) throw ParameterError("emission mix " + name + " has no sources");
  double total = 0.0;
  for (const auto& s : sources) {
    if (!(s.share >= 0.0 && s.share <= 1.0)) {
      throw ParameterError("share of " + s.name + " outside [0, 1]");
    }
    if (!(s.intensity >= 0.0) || !std::isfinite(s.intensity)) {
      throw ParameterError("intensity of " + s.name + " must be finite and non-negative");
    }
    total += s.share;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ParameterError("shares of emission mix " + name + " sum to " + std::to_string(total) + ", not 1");
  }
}

EmissionMix parse_emission_mix(const std::string& json_text) {
  EmissionMix mix;
  try {
    const auto j = nlohmann::json::parse(json_text);
    mix.name = j.at("name").get<std::string>();
    for (const auto& s : j.at("sources")) {
      mix.sources.push_back(
          {s.at("name").get<std::string>(), s.at("share").get<double>(), s.at("intensity").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad emission mix: ") + e.what());
  }
  mix.validate();
  return mix;
}

EmissionMix load_emission_mix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_emission_mix(buf.str());
}

double ghe(double energy_kwh, const EmissionMix& mix) {
  if (!(energy_kwh >= 0.0)) throw DomainError("energy must be non-negative");
  mix.validate();
  double factor = 0.0;
  for (const auto& s : mix.sources) factor += s.intensity * s.share;
  return energy_kwh * factor;
}

std::optional<double> first_crossing(std::span<const CurvePoint> curve, double threshold) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].j > threshold) continue;
    if (i == 0 || curve[i].j == threshold) return curve[i].time;
    const auto& a = curve[i - 1];
    const auto& b = curve[i];
    return a.time + (b.time - a.time) * (a.j - threshold) / (a.j - b.j);
  }
  return std::nullopt;
}

std::string SpeedupResult::describe() const {
  if (!spu) return "not reached";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", *spu);
  return buf;
}

SpeedupResult speedup(std::span<const CurvePoint> reference, std::span<const CurvePoint> candidate,
                      double threshold) {
  SpeedupResult r;
  r.time_reference = first_crossing(reference, threshold);
  r.time_candidate = first_crossing(candidate, threshold);
  if (r.time_reference && r.time_candidate) {
    if (*r.time_candidate <= 0.0) throw DomainError("candidate reaches the threshold at time 0");
    r.spu = *r.time_reference / *r.time_candidate;
  }
  return r;
}

ConfidenceInterval t_interval(std::span<const double> samples, double level) {
  if (samples.size() < 2) throw PreconditionError("a t-interval needs at least two samples");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  ConfidenceInterval ci;
  ci.n = samples.size();
  for (double x : samples) ci.mean += x;
  ci.mean /= static_cast<double>(ci.n);
  double ss = 0.0;
  for (double x : samples) ss += (x - ci.mean) * (x - ci.mean);
  ci.stddev = std::sqrt(ss / static_cast<double>(ci.n - 1));
  const boost::math::students_t dist(static_cast<double>(ci.n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
  const double half = t * ci.stddev / std::sqrt(static_cast<double>(ci.n));
  ci.low = ci.mean - half;
  ci.high = ci.mean + half;
  return ci;
}

}  // namespace tfddrl::evalcli
