#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tfddrl::evalcli {

struct EmissionSource {
  std::string name;
  double share = 0.0;      // P_i in [0, 1]
  double intensity = 0.0;  // U_i, kg CO2e per kWh
};

struct EmissionMix {
  std::string name;
  std::vector<EmissionSource> sources;

  // Throws ParameterError unless shares lie in [0, 1] and sum to 1 within
  // 1e-9 and intensities are non-negative.
  void validate() const;
};

EmissionMix parse_emission_mix(const std::string& json_text);
EmissionMix load_emission_mix(const std::filesystem::path& path);

// kg CO2e for `energy_kwh` of electricity: EC * sum_i U_i P_i.
// Throws DomainError for negative energy.
double ghe(double energy_kwh, const EmissionMix& mix);

inline constexpr double kJoulesPerKwh = 3.6e6;

// (wall-clock seconds, J) samples in time order.
struct CurvePoint {
  double time = 0.0;
  double j = 0.0;
};

// First time the curve reaches J <= threshold, interpolating linearly
// between the last sample above and the first at or below it.
std::optional<double> first_crossing(std::span<const CurvePoint> curve, double threshold);

struct SpeedupResult {
  std::optional<double> time_reference;
  std::optional<double> time_candidate;
  std::optional<double> spu;  // absent unless both curves cross

  bool reached() const { return spu.has_value(); }
  std::string describe() const;  // the ratio, or "not reached"
};

// Time_r / Time_t at threshold J*. Throws DomainError when the candidate
// crosses at time 0.
SpeedupResult speedup(std::span<const CurvePoint> reference, std::span<const CurvePoint> candidate,
                      double threshold);

struct ConfidenceInterval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::size_t n = 0;
};

// Two-sided Student t interval for the mean. Throws PreconditionError for
// fewer than two samples.
ConfidenceInterval t_interval(std::span<const double> samples, double level = 0.95);

}  // namespace tfddrl::evalcli
