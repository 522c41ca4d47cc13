#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tfddrl::envsim {

enum class Tier { kEdge, kCloud };

std::string_view to_string(Tier tier);
Tier parse_tier(std::string_view name);

struct ServerSpec {
  int id = 0;
  Tier tier = Tier::kEdge;
  double freq = 0.0;         // MHz, average per core
  double ram = 0.0;          // GB
  double exec_power = 0.0;   // W while executing
  double tx_power = 0.0;     // W while transmitting
  double cloud_price = 0.0;  // currency / hour, cloud tier only
  double electricity_price = 0.0;  // currency / kWh, edge tier only
};

// Dense |N| x |N| matrices, row = sender, column = receiver.
class LinkMatrix {
 public:
  LinkMatrix() = default;
  explicit LinkMatrix(std::size_t servers)
      : n_(servers), propagation_ms_(servers * servers, 0.0),
        bandwidth_(servers * servers, 0.0) {}

  std::size_t size() const { return n_; }

  double propagation_ms(std::size_t from, std::size_t to) const { return propagation_ms_[from * n_ + to]; }
  double propagation_s(std::size_t from, std::size_t to) const { return propagation_ms(from, to) * 1e-3; }
  double bandwidth(std::size_t from, std::size_t to) const { return bandwidth_[from * n_ + to]; }  // bytes/s

  void set(std::size_t from, std::size_t to, double propagation_ms, double bandwidth) {
    propagation_ms_[from * n_ + to] = propagation_ms;
    bandwidth_[from * n_ + to] = bandwidth;
  }
  void set_symmetric(std::size_t a, std::size_t b, double propagation_ms, double bandwidth) {
    set(a, b, propagation_ms, bandwidth);
    set(b, a, propagation_ms, bandwidth);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> propagation_ms_;
  std::vector<double> bandwidth_;
};

// Normalization bounds for one task (or one application).
struct CostBounds {
  double t_min = 0.0, t_max = 0.0;  // s
  double e_min = 0.0, e_max = 0.0;  // J
  double f_min = 0.0, f_max = 0.0;  // currency
};

struct CostWeights {
  double w1 = 1.0 / 3.0;  // response time
  double w2 = 1.0 / 3.0;  // energy
  double w3 = 1.0 / 3.0;  // monetary

  // Rescaled to sum to exactly one. Throws ParameterError when any weight is
  // negative or all are zero.
  CostWeights normalized() const;
};

struct EnvironmentSpec {
  std::vector<ServerSpec> servers;
  LinkMatrix links;
  CostWeights weights;
  // When set, replaces the analytic per-task bounds for every task.
  std::optional<CostBounds> bounds_override;

  std::size_t size() const { return servers.size(); }

  // Structural checks (C3, link coverage, tier prices, override bounds).
  // Throws ParameterError / ConstraintViolation.
  void validate() const;
};

// Loads/stores the JSON environment description. Layout:
//   {"servers": [{"id", "tier": "edge"|"cloud", "freq_mhz", "ram_gb",
//                 "exec_power_w", "tx_power_w", "cloud_price_per_hour",
//                 "electricity_price_per_kwh"}],
//    "links": {"propagation_ms": [[...]], "bandwidth_bytes_per_s": [[...]]},
//    "weights": [w1, w2, w3],
//    "bounds_override": {"t_min", "t_max", "e_min", "e_max", "f_min", "f_max"}}
EnvironmentSpec parse_environment(const std::string& json_text);
std::string serialize_environment(const EnvironmentSpec& env);
EnvironmentSpec load_environment(const std::filesystem::path& path);

// Three-server edge/edge/cloud world used by the examples and tests.
EnvironmentSpec reference_environment();

}  // namespace tfddrl::envsim
