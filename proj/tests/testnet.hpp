// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// Loopback test network: a recursive resolver stand-in that forwards by
// zone and records everything it sees, plus a scripted authoritative
// upstream with deterministic answers. Used by integration and acceptance
// suites; all state is observable for wire-level assertions.

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "odns/net.hpp"
#include "odns/rng.hpp"
#include "odns/wire.hpp"

namespace odns::testnet {

struct CapturedDatagram {
  wire::Bytes raw;
  net::Endpoint from;
};

// Forwards queries whose names fall under `odns_zone` to `odns_upstream`
// and everything else to `default_upstream`, sending from its service
// socket so the egress source address equals the service address. Can
// misbehave on request: attach a client-subnet option, randomize query
// name case (0x20), or strip additional records.
class TestRecursive {
public:
  struct Options {
    wire::DnsName odns_zone;
    net::Endpoint odns_upstream;
    net::Endpoint default_upstream;
    bool add_ecs = false;
    bool apply_0x20 = false;
    bool strip_additional = false;
  };

  explicit TestRecursive(Options options);
  ~TestRecursive();

  void start();
  void stop();

  net::Endpoint endpoint() const;

  std::vector<CapturedDatagram> captured_queries();    // client -> recursive
  std::vector<CapturedDatagram> captured_responses();  // upstream -> recursive
  void clear_capture();

private:
  void loop();
  wire::Bytes perturb(const wire::Bytes& query);

  Options options_;
  net::UdpSocket socket_;
  std::thread thread_;
  std::atomic<bool> running_{false};

  std::mutex mutex_;
  std::unordered_map<std::uint32_t, net::Endpoint> pending_;  // id -> client
  std::vector<CapturedDatagram> queries_;
  std::vector<CapturedDatagram> responses_;
  std::mt19937_64 case_rng_{0x20};
};

// Authoritative stand-in with deterministic A answers; every query it
// receives is recorded. Can be scripted per-test or told to go silent.
class ScriptedUpstream {
public:
  using Script = std::function<std::optional<wire::DnsMessage>(const wire::DnsMessage&)>;

  explicit ScriptedUpstream(std::uint32_t ttl = 300);
  ~ScriptedUpstream();

  void start();
  void stop();

  net::Endpoint endpoint() const;

  // Deterministic answer address for a query name: 10.x.y.z from a stable
  // hash, so tests can predict every answer.
  static wire::Bytes answer_address(const std::string& qname);

  void set_script(Script script);
  void set_silent(bool silent) { silent_ = silent; }

  std::vector<CapturedDatagram> captured_queries();
  std::size_t query_count();
  void clear_capture();

private:
  std::optional<wire::DnsMessage> answer(const wire::DnsMessage& query);

  std::uint32_t ttl_;
  std::unique_ptr<net::UdpServer> server_;
  std::atomic<bool> silent_{false};

  std::mutex mutex_;
  Script script_;
  std::vector<CapturedDatagram> queries_;
};

// Sends `query` to `server` and decodes the reply; convenience for tests.
std::optional<wire::DnsMessage> query_server(const wire::DnsMessage& query, const net::Endpoint& server,
                                             std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

}  // namespace odns::testnet
