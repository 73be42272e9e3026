// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "odns/errors.hpp"

namespace odns::net {

namespace {

sockaddr_in to_sockaddr(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(ep.ip);
  addr.sin_port = htons(ep.port);
  return addr;
}

Endpoint from_sockaddr(const sockaddr_in& addr) {
  return Endpoint{ntohl(addr.sin_addr.s_addr), ntohs(addr.sin_port)};
}

constexpr std::size_t kMaxDatagram = 65535;

}  // namespace

Endpoint Endpoint::parse(std::string_view text, std::uint16_t default_port) {
  Endpoint ep;
  ep.port = default_port;
  std::string host(text);
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    host = std::string(text.substr(0, colon));
    auto port_text = text.substr(colon + 1);
    std::uint32_t port = 0;
    auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || p != port_text.data() + port_text.size() || port > 0xffff) {
      throw ConfigError("bad port in '" + std::string(text) + "'");
    }
    ep.port = static_cast<std::uint16_t>(port);
  }
  in_addr addr{};
  if (inet_pton(AF_INET, host.c_str(), &addr) != 1) {
    throw ConfigError("bad IPv4 address '" + host + "'");
  }
  ep.ip = ntohl(addr.s_addr);
  return ep;
}

std::string Endpoint::to_string() const {
  in_addr addr{};
  addr.s_addr = htonl(ip);
  char buf[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &addr, buf, sizeof(buf));
  return std::string(buf) + ":" + std::to_string(port);
}

UdpSocket::UdpSocket() {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw NetworkError("socket: " + std::string(std::strerror(errno)));
}

UdpSocket::UdpSocket(Endpoint bind_to) : UdpSocket() {
  sockaddr_in addr = to_sockaddr(bind_to);
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    std::string err = std::strerror(errno);
    close();
    throw NetworkError("bind " + bind_to.to_string() + ": " + err);
  }
}

UdpSocket::~UdpSocket() { close(); }

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void UdpSocket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Endpoint UdpSocket::local_endpoint() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw NetworkError("getsockname: " + std::string(std::strerror(errno)));
  }
  return from_sockaddr(addr);
}

void UdpSocket::send(const wire::Bytes& data, const Endpoint& to) {
  sockaddr_in addr = to_sockaddr(to);
  ssize_t n = ::sendto(fd_, data.data(), data.size(), 0, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  if (n < 0) throw NetworkError("sendto " + to.to_string() + ": " + std::string(std::strerror(errno)));
}

std::optional<wire::Bytes> UdpSocket::receive(Endpoint& from, std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc == 0) return std::nullopt;
  if (rc < 0) {
    if (errno == EINTR) return std::nullopt;
    throw NetworkError("poll: " + std::string(std::strerror(errno)));
  }
  wire::Bytes buf(kMaxDatagram);
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&addr), &len);
  if (n < 0) {
    if (errno == EINTR || errno == EAGAIN || errno == EBADF) return std::nullopt;
    throw NetworkError("recvfrom: " + std::string(std::strerror(errno)));
  }
  buf.resize(static_cast<std::size_t>(n));
  from = from_sockaddr(addr);
  return buf;
}

std::optional<wire::Bytes> udp_exchange(const wire::Bytes& query, const Endpoint& to,
                                        std::chrono::milliseconds timeout, int retries) {
  if (query.size() < 2) return std::nullopt;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    UdpSocket sock;
    sock.send(query, to);
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) break;
      Endpoint from;
      auto data = sock.receive(from, std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
      if (!data) break;
      // Accept only datagrams from the queried server with a matching id.
      if (from == to && data->size() >= 2 && (*data)[0] == query[0] && (*data)[1] == query[1]) {
        return data;
      }
    }
  }
  return std::nullopt;
}

UdpServer::UdpServer(Endpoint bind_to) : socket_(bind_to) {}

UdpServer::~UdpServer() { stop(); }

void UdpServer::start(Handler handler) {
  handler_ = std::move(handler);
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void UdpServer::stop() {
  if (!running_.exchange(false)) return;
  if (thread_.joinable()) thread_.join();
  while (in_flight_.load() > 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  socket_.close();
}

void UdpServer::loop() {
  while (running_) {
    Endpoint peer;
    auto data = socket_.receive(peer, std::chrono::milliseconds(50));
    if (!data) continue;
    ++in_flight_;
    std::thread([this, data = std::move(*data), peer] {
      try {
        if (auto reply = handler_(data, peer)) socket_.send(*reply, peer);
      } catch (const std::exception&) {
        // Handlers answer errors in-band; anything escaping is dropped.
      }
      --in_flight_;
    }).detach();
  }
}

}  // namespace odns::net
