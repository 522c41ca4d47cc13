#include "tfddrl/runtime/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <utility>

#include "tfddrl/errors.hpp"
#include "tfddrl/runtime/envelope.hpp"

namespace tfddrl::runtime {

namespace {

// Small kernel buffers keep backpressure close to the learner's queue.
constexpr int kSocketBuffer = 32 * 1024;

void limit_buffers(int fd) {
  ::setsockopt(fd, SOL_SOCKET, SO_SNDBUF, &kSocketBuffer, sizeof kSocketBuffer);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &kSocketBuffer, sizeof kSocketBuffer);
}

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Returns the number of bytes read before end of stream.
std::size_t read_full(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r == 0) break;
    if (r < 0) {
      if (errno == EINTR) continue;
      throw IoError(errno_text("recv"));
    }
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

FrameConnection::FrameConnection(FrameConnection&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

FrameConnection& FrameConnection::operator=(FrameConnection&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

FrameConnection::~FrameConnection() { close(); }

void FrameConnection::send_raw(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) throw IoError("send on a closed connection");
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t r = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw IoError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(r);
  }
}

void FrameConnection::send_frame(std::span<const std::uint8_t> payload) { send_raw(frame(payload)); }

std::optional<std::vector<std::uint8_t>> FrameConnection::receive_frame() {
  if (fd_ < 0) throw IoError("receive on a closed connection");
  std::array<std::uint8_t, 4> header{};
  const std::size_t got = read_full(fd_, header.data(), 4);
  if (got == 0) return std::nullopt;
  if (got < 4) throw IoError("connection closed inside a frame header");
  const std::uint32_t n = frame_length(header);
  if (n > kMaxFrameBytes) throw LimitError("frame of " + std::to_string(n) + " bytes exceeds the limit");
  std::vector<std::uint8_t> payload(n);
  if (read_full(fd_, payload.data(), n) < n) throw IoError("connection closed inside a frame");
  return payload;
}

void FrameConnection::finish_sending() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

void FrameConnection::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

TcpListener::TcpListener(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw IoError(errno_text("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  limit_buffers(fd_);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 64) < 0) {
    const std::string msg = errno_text("bind/listen");
    ::close(fd_);
    throw IoError(msg + " on port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

FrameConnection TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return FrameConnection(fd);
    if (errno != EINTR) throw IoError(errno_text("accept"));
  }
}

FrameConnection connect_loopback(std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError(errno_text("socket"));
  limit_buffers(fd);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const std::string msg = errno_text("connect");
    ::close(fd);
    throw IoError(msg + " to port " + std::to_string(port));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return FrameConnection(fd);
}

}  // namespace tfddrl::runtime
