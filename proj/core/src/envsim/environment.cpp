#include "tfddrl/envsim/environment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tfddrl/errors.hpp"

namespace tfddrl::envsim {

using nlohmann::json;

std::string_view to_string(Tier tier) { return tier == Tier::kEdge ? "edge" : "cloud"; }

Tier parse_tier(std::string_view name) {
  if (name == "edge") return Tier::kEdge;
  if (name == "cloud") return Tier::kCloud;
  throw ParameterError("unknown tier '" + std::string(name) + "'");
}

CostWeights CostWeights::normalized() const {
  if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0 || !std::isfinite(w1 + w2 + w3)) {
    throw ParameterError("cost weights must be finite and non-negative");
  }
  const double sum = w1 + w2 + w3;
  if (!(sum > 0.0)) throw ParameterError("cost weights must not all be zero");
  CostWeights w{w1 / sum, w2 / sum, w3 / sum};
  // Fold rounding residue into the largest weight so the sum is exactly one.
  double* largest = &w.w1;
  if (w.w2 > *largest) largest = &w.w2;
  if (w.w3 > *largest) largest = &w.w3;
  *largest += 1.0 - (w.w1 + w.w2 + w.w3);
  // The fold can straddle 1 when the largest weight's ulp is as coarse as
  // the sum's; finish by stepping the smallest positive weight, whose ulp is
  // finer.
  double* finest = largest;
  for (double* p : {&w.w1, &w.w2, &w.w3}) {
    if (*p > 0.0 && *p < *finest) finest = p;
  }
  for (int step = 0; step < 4096; ++step) {
    const double sum = w.w1 + w.w2 + w.w3;
    if (sum == 1.0) break;
    *finest = std::nextafter(*finest, sum > 1.0 ? 0.0 : 1.0);
  }
  return w;
}

void EnvironmentSpec::validate() const {
  if (servers.empty()) throw ParameterError("environment needs at least one server");
  if (links.size() != servers.size()) {
    throw ParameterError("link matrix covers " + std::to_string(links.size()) +
                         " servers, environment has " + std::to_string(servers.size()));
  }
  for (std::size_t k = 0; k < servers.size(); ++k) {
    const auto& s = servers[k];
    const std::string who = "server " + std::to_string(k);
    if (!(s.freq > 0.0) || !(s.ram > 0.0)) {
      throw ConstraintViolation("C3", who + " needs positive frequency and RAM");
    }
    if (!(s.exec_power > 0.0) || !(s.tx_power > 0.0)) {
      throw ParameterError(who + " needs positive execution and transmission power");
    }
    if (s.tier == Tier::kCloud && s.cloud_price < 0.0) {
      throw ParameterError(who + " has a negative cloud price");
    }
    if (s.tier == Tier::kEdge && s.electricity_price < 0.0) {
      throw ParameterError(who + " has a negative electricity price");
    }
    for (std::size_t j = 0; j < servers.size(); ++j) {
      if (j == k) continue;
      if (links.propagation_ms(k, j) < 0.0 || links.bandwidth(k, j) < 0.0) {
        throw ParameterError("link " + std::to_string(k) + "->" + std::to_string(j) +
                             " has negative propagation or bandwidth");
      }
    }
  }
  weights.normalized();
  if (bounds_override) {
    const auto& b = *bounds_override;
    if (!(b.t_max > b.t_min) || !(b.e_max > b.e_min) || !(b.f_max > b.f_min)) {
      throw ParameterError("override bounds need max strictly greater than min");
    }
  }
}

EnvironmentSpec parse_environment(const std::string& json_text) {
  EnvironmentSpec env;
  try {
    const json doc = json::parse(json_text);
    for (const auto& s : doc.at("servers")) {
      ServerSpec spec;
      spec.id = s.value("id", static_cast<int>(env.servers.size()));
      spec.tier = parse_tier(s.at("tier").get<std::string>());
      spec.freq = s.at("freq_mhz").get<double>();
      spec.ram = s.at("ram_gb").get<double>();
      spec.exec_power = s.at("exec_power_w").get<double>();
      spec.tx_power = s.at("tx_power_w").get<double>();
      spec.cloud_price = s.value("cloud_price_per_hour", 0.0);
      spec.electricity_price = s.value("electricity_price_per_kwh", 0.0);
      env.servers.push_back(spec);
    }
    const std::size_t n = env.servers.size();
    env.links = LinkMatrix(n);
    const auto& prop = doc.at("links").at("propagation_ms");
    const auto& bw = doc.at("links").at("bandwidth_bytes_per_s");
    if (prop.size() != n || bw.size() != n) throw ParameterError("link matrix must be dense |N| x |N|");
    for (std::size_t a = 0; a < n; ++a) {
      if (prop[a].size() != n || bw[a].size() != n) {
        throw ParameterError("link matrix must be dense |N| x |N|");
      }
      for (std::size_t b = 0; b < n; ++b) {
        env.links.set(a, b, prop[a][b].get<double>(), bw[a][b].get<double>());
      }
    }
    if (doc.contains("weights")) {
      const auto& w = doc.at("weights");
      env.weights = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()};
    }
    if (doc.contains("bounds_override") && !doc.at("bounds_override").is_null()) {
      const auto& b = doc.at("bounds_override");
      env.bounds_override = CostBounds{b.at("t_min").get<double>(), b.at("t_max").get<double>(),
                                       b.at("e_min").get<double>(), b.at("e_max").get<double>(),
                                       b.at("f_min").get<double>(), b.at("f_max").get<double>()};
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed environment spec: ") + e.what());
  }
  env.validate();
  return env;
}

std::string serialize_environment(const EnvironmentSpec& env) {
  json servers = json::array();
  for (const auto& s : env.servers) {
    json j = {{"id", s.id},
              {"tier", std::string(to_string(s.tier))},
              {"freq_mhz", s.freq},
              {"ram_gb", s.ram},
              {"exec_power_w", s.exec_power},
              {"tx_power_w", s.tx_power}};
    if (s.tier == Tier::kCloud) j["cloud_price_per_hour"] = s.cloud_price;
    else j["electricity_price_per_kwh"] = s.electricity_price;
    servers.push_back(std::move(j));
  }
  const std::size_t n = env.size();
  json prop = json::array(), bw = json::array();
  for (std::size_t a = 0; a < n; ++a) {
    json prow = json::array(), brow = json::array();
    for (std::size_t b = 0; b < n; ++b) {
      prow.push_back(env.links.propagation_ms(a, b));
      brow.push_back(env.links.bandwidth(a, b));
    }
    prop.push_back(std::move(prow));
    bw.push_back(std::move(brow));
  }
  json doc = {{"servers", servers},
              {"links", {{"propagation_ms", prop}, {"bandwidth_bytes_per_s", bw}}},
              {"weights", {env.weights.w1, env.weights.w2, env.weights.w3}}};
  if (env.bounds_override) {
    const auto& b = *env.bounds_override;
    doc["bounds_override"] = {{"t_min", b.t_min}, {"t_max", b.t_max}, {"e_min", b.e_min},
                              {"e_max", b.e_max}, {"f_min", b.f_min}, {"f_max", b.f_max}};
  }
  return doc.dump(2);
}

EnvironmentSpec load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open environment spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_environment(ss.str());
}

EnvironmentSpec reference_environment() {
  EnvironmentSpec env;
  env.servers = {
      {0, Tier::kEdge, 1200.0, 1.0, 6.0, 0.8, 0.0, 0.2871},
      {1, Tier::kEdge, 2300.0, 2.0, 40.0, 1.0, 0.0, 0.2871},
      {2, Tier::kCloud, 2000.0, 8.0, 70.0, 4.0, 0.1296, 0.0},
  };
  env.links = LinkMatrix(3);
  env.links.set_symmetric(0, 1, 3.0, 135e6);
  env.links.set_symmetric(0, 2, 9.0, 17e6);
  env.links.set_symmetric(1, 2, 9.0, 17e6);
  env.weights = {0.33, 0.33, 0.33};
  return env;
}

}  // namespace tfddrl::envsim
