#include "tfddrl/runtime/envelope.hpp"

#include <algorithm>
#include <string>

#include "tfddrl/errors.hpp"
#include "tfddrl/nn/checkpoint.hpp"

namespace tfddrl::runtime {

using nn::get_f64;
using nn::get_u32;
using nn::get_u64;
using nn::put_f64;
using nn::put_u32;
using nn::put_u64;

namespace {

void put_state(std::vector<std::uint8_t>& out, const mdp::StateVector& s) {
  for (double v : s.values()) put_f64(out, v);
}

void put_mask(std::vector<std::uint8_t>& out, const mdp::ActionMask& m) {
  out.insert(out.end(), m.begin(), m.end());
}

void need(std::span<const std::uint8_t> in, std::size_t pos, std::size_t n) {
  if (pos + n > in.size()) throw IoError("truncated envelope");
}

mdp::StateVector get_state(std::span<const std::uint8_t> in, std::size_t& pos, std::size_t dim,
                           std::size_t task_dim) {
  need(in, pos, 8 * dim);
  std::vector<double> v(dim);
  for (auto& x : v) x = get_f64(in, pos);
  return mdp::StateVector(std::move(v), task_dim);
}

mdp::ActionMask get_mask(std::span<const std::uint8_t> in, std::size_t& pos, std::size_t n) {
  need(in, pos, n);
  mdp::ActionMask m(in.begin() + static_cast<std::ptrdiff_t>(pos),
                    in.begin() + static_cast<std::ptrdiff_t>(pos + n));
  pos += n;
  return m;
}

std::vector<std::uint8_t> encode_body(const TrajectoryEnvelope& e) {
  const auto& tr = e.trajectory.transitions;
  const std::size_t dim = tr.empty() ? 0 : tr.front().state.size();
  const std::size_t task_dim = tr.empty() ? 0 : tr.front().state.task_dim();
  const std::size_t actions = tr.empty() ? 0 : tr.front().mask.size();
  std::vector<std::uint8_t> out;
  out.reserve(64 + tr.size() * (16 * dim + 2 * actions + 48));
  put_u32(out, kEnvelopeFormat);
  put_u64(out, e.id);
  put_u64(out, e.actor_id);
  put_u64(out, e.policy_version);
  put_u64(out, tr.size());
  put_u64(out, dim);
  put_u64(out, task_dim);
  put_u64(out, actions);
  for (const auto& t : tr) {
    if (t.state.size() != dim || t.next_state.size() != dim || t.mask.size() != actions ||
        t.next_mask.size() != actions) {
      throw ShapeError("transitions of one trajectory differ in shape");
    }
    put_state(out, t.state);
    put_mask(out, t.mask);
    put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(t.action)));
    put_f64(out, t.reward);
    put_f64(out, t.behavior_prob);
    put_state(out, t.next_state);
    put_mask(out, t.next_mask);
    put_f64(out, t.priority);
    out.push_back(t.app_boundary ? 1 : 0);
  }
  return out;
}

}  // namespace

TrajectoryEnvelope make_envelope(std::uint64_t id, std::uint64_t actor_id, mdp::Trajectory trajectory) {
  TrajectoryEnvelope e;
  e.id = id;
  e.actor_id = actor_id;
  e.policy_version = trajectory.policy_version;
  e.trajectory = std::move(trajectory);
  e.checksum = nn::fnv1a(encode_body(e));
  return e;
}

bool verify(const TrajectoryEnvelope& envelope) {
  return nn::fnv1a(encode_body(envelope)) == envelope.checksum;
}

std::vector<std::uint8_t> encode_envelope(const TrajectoryEnvelope& envelope) {
  auto out = encode_body(envelope);
  put_u64(out, envelope.checksum);
  return out;
}

TrajectoryEnvelope decode_envelope(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 7 * 8 + 8) throw IoError("envelope too short");
  const auto body = bytes.first(bytes.size() - 8);
  std::size_t pos = body.size();
  const std::uint64_t stored = get_u64(bytes, pos);
  if (nn::fnv1a(body) != stored) throw IoError("envelope checksum mismatch");

  pos = 0;
  const std::uint32_t format = get_u32(body, pos);
  if (format != kEnvelopeFormat) throw IoError("unsupported envelope format " + std::to_string(format));
  TrajectoryEnvelope e;
  e.id = get_u64(body, pos);
  e.actor_id = get_u64(body, pos);
  e.policy_version = get_u64(body, pos);
  const std::uint64_t count = get_u64(body, pos);
  const std::uint64_t dim = get_u64(body, pos);
  const std::uint64_t task_dim = get_u64(body, pos);
  const std::uint64_t actions = get_u64(body, pos);
  const std::uint64_t per = 16 * dim + 2 * actions + 8 * 4 + 1;
  if (task_dim > dim || count * per != body.size() - pos) throw IoError("envelope size mismatch");
  e.trajectory.policy_version = e.policy_version;
  e.trajectory.transitions.resize(count);
  for (auto& t : e.trajectory.transitions) {
    t.state = get_state(body, pos, dim, task_dim);
    t.mask = get_mask(body, pos, actions);
    t.action = static_cast<int>(static_cast<std::int64_t>(get_u64(body, pos)));
    t.reward = get_f64(body, pos);
    t.behavior_prob = get_f64(body, pos);
    t.next_state = get_state(body, pos, dim, task_dim);
    t.next_mask = get_mask(body, pos, actions);
    t.priority = get_f64(body, pos);
    t.app_boundary = body[pos++] != 0;
  }
  e.checksum = stored;
  return e;
}

std::vector<std::uint8_t> frame(std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxFrameBytes) throw LimitError("frame payload exceeds the frame limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::vector<std::uint8_t> out(4 + payload.size());
  out[0] = static_cast<std::uint8_t>(n >> 24);
  out[1] = static_cast<std::uint8_t>(n >> 16);
  out[2] = static_cast<std::uint8_t>(n >> 8);
  out[3] = static_cast<std::uint8_t>(n);
  std::copy(payload.begin(), payload.end(), out.begin() + 4);
  return out;
}

std::uint32_t frame_length(std::span<const std::uint8_t, 4> h) {
  return (std::uint32_t{h[0]} << 24) | (std::uint32_t{h[1]} << 16) | (std::uint32_t{h[2]} << 8) |
         std::uint32_t{h[3]};
}

}  // namespace tfddrl::runtime
