#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tfddrl/nn/config.hpp"

namespace tfddrl::nn {

inline constexpr std::uint32_t kCheckpointFormat = 1;

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes);

// FNV-1a over the little-endian bytes of the values.
std::uint64_t parameter_checksum(std::span<const double> values);

// Little-endian helpers shared with the runtime wire format.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);
std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos);
std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& pos);
double get_f64(std::span<const std::uint8_t> in, std::size_t& pos);

// Header {magic, format, config digest, version, parameter count, checksum}
// followed by the parameters as little-endian 64-bit floats.
std::vector<std::uint8_t> encode_checkpoint(const NetworkConfig& config, const ParameterSet& params);
// Throws IoError on a bad magic, format, digest, count or checksum.
ParameterSet decode_checkpoint(const NetworkConfig& config, std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const NetworkConfig& config,
                     const ParameterSet& params);
ParameterSet load_checkpoint(const std::filesystem::path& path, const NetworkConfig& config);

}  // namespace tfddrl::nn
