// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "odns/wire.hpp"

namespace odns::net {

// IPv4 UDP endpoint. The paper-scale deployment is v4-only; v6 transport
// would slot in behind the same interface.
struct Endpoint {
  std::uint32_t ip = 0;  // host byte order
  std::uint16_t port = 0;

  static Endpoint parse(std::string_view text, std::uint16_t default_port = 53);
  std::string to_string() const;

  bool operator==(const Endpoint&) const = default;
};

inline Endpoint loopback(std::uint16_t port) { return Endpoint{0x7f000001, port}; }

// Thin RAII wrapper over a bound UDP socket.
class UdpSocket {
public:
  UdpSocket();                         // unbound (ephemeral port on first send)
  explicit UdpSocket(Endpoint bind);   // bound; port 0 picks a free port
  ~UdpSocket();

  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  Endpoint local_endpoint() const;

  void send(const wire::Bytes& data, const Endpoint& to);
  // Blocks up to `timeout`; nullopt on timeout. `from` receives the sender.
  std::optional<wire::Bytes> receive(Endpoint& from, std::chrono::milliseconds timeout);

  void close();
  bool closed() const { return fd_ < 0; }

private:
  int fd_ = -1;
};

// One round trip: send `query` to `to` from a fresh ephemeral socket and
// wait for a datagram back from that address whose DNS id matches.
// Retries once on timeout; nullopt when both attempts time out.
std::optional<wire::Bytes> udp_exchange(const wire::Bytes& query, const Endpoint& to,
                                        std::chrono::milliseconds timeout, int retries = 1);

// Callback-driven UDP service. Each datagram is handed to the handler on a
// worker thread; a non-null result is sent back to the peer.
class UdpServer {
public:
  using Handler = std::function<std::optional<wire::Bytes>(const wire::Bytes&, const Endpoint&)>;

  explicit UdpServer(Endpoint bind);
  ~UdpServer();

  Endpoint local_endpoint() const { return socket_.local_endpoint(); }

  void start(Handler handler);
  void stop();

private:
  void loop();

  UdpSocket socket_;
  Handler handler_;
  std::thread thread_;
  std::atomic<bool> running_{false};
  std::atomic<int> in_flight_{0};
};

}  // namespace odns::net
