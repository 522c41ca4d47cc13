#include "tfddrl/nn/config.hpp"

#include <sstream>

#include "tfddrl/errors.hpp"

namespace tfddrl::nn {

void NetworkConfig::validate() const {
  if (input_dim == 0) throw ParameterError("input_dim must be positive");
  if (action_count == 0) throw ParameterError("action_count must be positive");
  if (fc_units.empty()) throw ParameterError("fc_units must not be empty");
  for (auto u : fc_units) {
    if (u == 0) throw ParameterError("fc_units entries must be positive");
  }
  if (context == 0) throw ParameterError("context window must be positive");
  if (tf_units > 0 && (heads == 0 || head_dim == 0 || mlp_dim == 0)) {
    throw ParameterError("heads, head_dim and mlp_dim must be positive");
  }
}

std::string NetworkConfig::describe() const {
  std::ostringstream out;
  out << "in=" << input_dim << ";fc=";
  for (std::size_t i = 0; i < fc_units.size(); ++i) out << (i ? "," : "") << fc_units[i];
  out << ";tf=" << tf_units << ";heads=" << heads << ";hd=" << head_dim << ";mlp=" << mlp_dim
      << ";k=" << context << ";act=" << action_count;
  return out.str();
}

std::uint64_t NetworkConfig::digest() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : describe()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

NetworkConfig NetworkConfig::desk(std::size_t input_dim, std::size_t action_count) {
  NetworkConfig c;
  c.input_dim = input_dim;
  c.action_count = action_count;
  c.fc_units = {32, 32, 16};
  c.tf_units = 1;
  c.heads = 2;
  c.head_dim = 8;
  c.mlp_dim = 32;
  return c;
}

NetworkConfig NetworkConfig::full(std::size_t input_dim, std::size_t action_count) {
  NetworkConfig c;
  c.input_dim = input_dim;
  c.action_count = action_count;
  return c;
}

std::size_t ParameterLayout::add(std::string name, std::size_t size) {
  const std::size_t offset = total_;
  segments_.push_back({std::move(name), offset, size});
  total_ += size;
  return offset;
}

const Segment& ParameterLayout::find(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw ReferenceError("no parameter segment named " + name);
}

}  // namespace tfddrl::nn
