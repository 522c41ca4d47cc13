#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tfddrl::nn {

struct NetworkConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> fc_units{256, 256, 128};  // ReLU trunk; last entry is the model width
  std::size_t tf_units = 2;  // gated attention blocks; 0 disables the transformer
  std::size_t heads = 4;
  std::size_t head_dim = 32;
  std::size_t mlp_dim = 32;
  std::size_t context = 8;  // K, states per attention window
  std::size_t action_count = 0;
  double gate_bias = 2.0;  // initial bias pushing the gates towards the residual path

  std::size_t model_dim() const { return fc_units.back(); }
  std::size_t attention_dim() const { return heads * head_dim; }

  // Throws ParameterError.
  void validate() const;
  // Stable FNV-1a digest of the architecture.
  std::uint64_t digest() const;
  std::string describe() const;

  // [32, 32, 16] trunk, 1 block, 2 heads of width 8, MLP width 32.
  static NetworkConfig desk(std::size_t input_dim, std::size_t action_count);
  // The defaults above.
  static NetworkConfig full(std::size_t input_dim, std::size_t action_count);
};

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// Named segments of the flat parameter vector, in storage order.
class ParameterLayout {
 public:
  std::size_t add(std::string name, std::size_t size);
  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& find(const std::string& name) const;
  std::size_t size() const { return total_; }

 private:
  std::vector<Segment> segments_;
  std::size_t total_ = 0;
};

struct ParameterSet {
  std::vector<double> values;
  std::uint64_t version = 0;

  bool operator==(const ParameterSet&) const = default;
};

}  // namespace tfddrl::nn
