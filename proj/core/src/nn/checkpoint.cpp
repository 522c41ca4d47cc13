#include "tfddrl/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tfddrl/errors.hpp"

namespace tfddrl::nn {

namespace {

constexpr char kMagic[8] = {'T', 'F', 'D', 'D', 'R', 'L', 'C', 'K'};

void need(std::span<const std::uint8_t> in, std::size_t pos, std::size_t n) {
  if (pos + n > in.size()) throw IoError("truncated binary record");
}

}  // namespace

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
  need(in, pos, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& pos) {
  need(in, pos, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(in[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

double get_f64(std::span<const std::uint8_t> in, std::size_t& pos) {
  return std::bit_cast<double>(get_u64(in, pos));
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t parameter_checksum(std::span<const double> values) {
  std::uint64_t h = 14695981039346656037ull;
  for (double d : values) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  return h;
}

std::vector<std::uint8_t> encode_checkpoint(const NetworkConfig& config, const ParameterSet& params) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointFormat);
  put_u64(out, config.digest());
  put_u64(out, params.version);
  put_u64(out, params.values.size());
  put_u64(out, parameter_checksum(params.values));
  out.reserve(out.size() + 8 * params.values.size());
  for (double v : params.values) put_f64(out, v);
  return out;
}

ParameterSet decode_checkpoint(const NetworkConfig& config, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a parameter checkpoint");
  }
  std::size_t pos = sizeof(kMagic);
  if (get_u32(bytes, pos) != kCheckpointFormat) throw IoError("unsupported checkpoint format");
  if (get_u64(bytes, pos) != config.digest()) {
    throw IoError("checkpoint was written for a different network configuration");
  }
  ParameterSet out;
  out.version = get_u64(bytes, pos);
  const std::uint64_t count = get_u64(bytes, pos);
  const std::uint64_t checksum = get_u64(bytes, pos);
  if (bytes.size() - pos != count * 8) throw IoError("checkpoint payload size mismatch");
  out.values.resize(count);
  for (auto& v : out.values) v = get_f64(bytes, pos);
  if (parameter_checksum(out.values) != checksum) throw IoError("checkpoint checksum mismatch");
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkConfig& config,
                     const ParameterSet& params) {
  const auto bytes = encode_checkpoint(config, params);
  // Write beside the target and rename, so a crash never leaves a torn file.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + tmp.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

ParameterSet load_checkpoint(const std::filesystem::path& path, const NetworkConfig& config) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(config, bytes);
}

}  // namespace tfddrl::nn
