#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tfddrl::runtime {

// Owns a connected stream socket carrying length-prefixed frames.
class FrameConnection {
 public:
  FrameConnection() = default;
  explicit FrameConnection(int fd) : fd_(fd) {}
  FrameConnection(FrameConnection&& other) noexcept;
  FrameConnection& operator=(FrameConnection&& other) noexcept;
  FrameConnection(const FrameConnection&) = delete;
  FrameConnection& operator=(const FrameConnection&) = delete;
  ~FrameConnection();

  bool open() const { return fd_ >= 0; }
  // Throws IoError when the peer is gone.
  void send_frame(std::span<const std::uint8_t> payload);
  // Raw bytes, for tests that corrupt frames on the wire.
  void send_raw(std::span<const std::uint8_t> bytes);
  // nullopt on an orderly close between frames. Throws IoError on a frame cut
  // short or LimitError on a length above kMaxFrameBytes.
  std::optional<std::vector<std::uint8_t>> receive_frame();
  // Half-close: the peer sees end of stream after the frames already sent.
  void finish_sending();
  void close();

 private:
  int fd_ = -1;
};

// Loopback listener. Port 0 picks a free port.
class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port = 0);
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener();

  std::uint16_t port() const { return port_; }
  FrameConnection accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

FrameConnection connect_loopback(std::uint16_t port);

}  // namespace tfddrl::runtime
