#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tfddrl/mdp/transition.hpp"

namespace tfddrl::runtime {

inline constexpr std::uint32_t kEnvelopeFormat = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

struct TrajectoryEnvelope {
  std::uint64_t id = 0;  // unique per run
  std::uint64_t actor_id = 0;
  std::uint64_t policy_version = 0;
  mdp::Trajectory trajectory;
  std::uint64_t checksum = 0;  // FNV-1a of the encoded body

  bool operator==(const TrajectoryEnvelope&) const = default;
};

// Fills in the checksum.
TrajectoryEnvelope make_envelope(std::uint64_t id, std::uint64_t actor_id, mdp::Trajectory trajectory);

// Recomputes the checksum of the body.
bool verify(const TrajectoryEnvelope& envelope);

// Body layout, integers and floats little-endian 64-bit unless noted:
//   u32 format, id, actor id, policy version, transition count, state size,
//   task feature count, action count; per transition: state, mask (one byte
//   per action), action, reward, mu, next state, next mask, priority,
//   boundary (one byte); then the checksum of everything before it.
std::vector<std::uint8_t> encode_envelope(const TrajectoryEnvelope& envelope);
// Throws IoError on a malformed body or checksum mismatch.
TrajectoryEnvelope decode_envelope(std::span<const std::uint8_t> bytes);

// Wire frame: 4-byte big-endian payload length, then the payload.
std::vector<std::uint8_t> frame(std::span<const std::uint8_t> payload);
std::uint32_t frame_length(std::span<const std::uint8_t, 4> header);

}  // namespace tfddrl::runtime
