#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <utility>

#include "channel.hpp"

namespace noisepad::transport {

class SocketHandle {
 public:
  SocketHandle() = default;
  explicit SocketHandle(int fd) : fd_(fd) {}
  SocketHandle(SocketHandle&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  SocketHandle& operator=(SocketHandle&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  SocketHandle(const SocketHandle&) = delete;
  SocketHandle& operator=(const SocketHandle&) = delete;
  ~SocketHandle() { reset(); }

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline std::string errno_text() { return std::strerror(errno); }

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "host:port"; a bare port means 127.0.0.1.
inline Endpoint parse_endpoint(const std::string& text) {
  Endpoint ep;
  auto colon = text.rfind(':');
  std::string port_text = text;
  if (colon != std::string::npos) {
    ep.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    unsigned long p = std::stoul(port_text, &used);
    if (used != port_text.size() || p > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw Error(ErrorCode::validation, "invalid address '" + text + "', expected host:port");
  }
  return ep;
}

namespace detail {

inline sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error(ErrorCode::channel, "cannot resolve host " + ep.host);
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}

inline void set_timeout(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

}  // namespace detail

class SocketChannel : public Channel {
 public:
  SocketChannel(SocketHandle socket, std::chrono::milliseconds timeout) : socket_(std::move(socket)) {
    detail::set_timeout(socket_.get(), timeout);
    int one = 1;
    ::setsockopt(socket_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }

  void send(const Frame& frame) override {
    const auto bytes = frame_encode(frame);
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      ssize_t n = ::send(socket_.get(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::channel, "send failed: " + errno_text());
      sent += static_cast<std::size_t>(n);
    }
  }

  Frame receive() override {
    std::vector<std::uint8_t> header(kHeaderSize);
    read_exact(header);
    const auto h = parse_header(header);
    Frame f;
    f.type = h.type;
    f.payload.resize(h.payload_length);
    read_exact(f.payload);
    return f;
  }

  void close() override {
    if (socket_) ::shutdown(socket_.get(), SHUT_RDWR);
  }

 private:
  void read_exact(std::span<std::uint8_t> buf) {
    std::size_t got = 0;
    while (got < buf.size()) {
      ssize_t n = ::recv(socket_.get(), buf.data() + got, buf.size() - got, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) throw Error(ErrorCode::channel, "receive timed out");
      if (n < 0) throw Error(ErrorCode::channel, "receive failed: " + errno_text());
      if (n == 0) throw Error(ErrorCode::channel, "peer closed the connection");
      got += static_cast<std::size_t>(n);
    }
  }

  SocketHandle socket_;
};

class TcpListener {
 public:
  explicit TcpListener(const Endpoint& ep) {
    socket_ = SocketHandle(::socket(AF_INET, SOCK_STREAM, 0));
    if (!socket_) throw Error(ErrorCode::channel, "socket: " + errno_text());
    int one = 1;
    ::setsockopt(socket_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    auto addr = detail::resolve(ep);
    if (::bind(socket_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      throw Error(ErrorCode::channel, "bind " + ep.host + ":" + std::to_string(ep.port) + ": " + errno_text());
    }
    if (::listen(socket_.get(), 16) != 0) throw Error(ErrorCode::channel, "listen: " + errno_text());
  }

  std::uint16_t port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    ::getsockname(socket_.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
  }

  std::unique_ptr<SocketChannel> accept(std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
    int fd;
    do {
      fd = ::accept(socket_.get(), nullptr, nullptr);
    } while (fd < 0 && errno == EINTR);
    if (fd < 0) throw Error(ErrorCode::channel, "accept: " + errno_text());
    return std::make_unique<SocketChannel>(SocketHandle(fd), timeout);
  }

 private:
  SocketHandle socket_;
};

inline std::unique_ptr<SocketChannel> connect_tcp(const Endpoint& ep,
                                                  std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
  SocketHandle s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s) throw Error(ErrorCode::channel, "socket: " + errno_text());
  auto addr = detail::resolve(ep);
  if (::connect(s.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error(ErrorCode::channel, "connect " + ep.host + ":" + std::to_string(ep.port) + ": " + errno_text());
  }
  return std::make_unique<SocketChannel>(std::move(s), timeout);
}

}  // namespace noisepad::transport
