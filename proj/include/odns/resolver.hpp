// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// Authoritative endpoint for the ODNS zone: answers the special bootstrap
// query with its identity, decrypts incoming queries, resolves the
// plaintext domain through configured upstreams (forwarder mode), and
// returns sealed answers with every outer TTL set to zero.

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "odns/cache.hpp"
#include "odns/crypto.hpp"
#include "odns/net.hpp"
#include "odns/rng.hpp"
#include "odns/stub.hpp"
#include "odns/wire.hpp"

namespace odns::resolver {

using stub::Clock;
using stub::Exchange;

struct ResolverConfig {
  net::Endpoint listen = net::Endpoint{0, 5301};  // 0.0.0.0:5301
  wire::DnsName zone_suffix;
  std::string keypair_path;
  std::vector<net::Endpoint> upstreams;  // at least one
  std::size_t cache_capacity = 0;        // entries; 0 = unlimited
  std::chrono::milliseconds query_timeout = std::chrono::milliseconds(2000);

  void validate() const;
};

ResolverConfig config_from_kv(const std::map<std::string, std::string>& kv);

// 64-byte binary keypair file (secret then public), created mode 0600.
void save_keypair(const crypto::ResolverKeyPair& kp, const std::string& path);
crypto::ResolverKeyPair load_keypair(const std::string& path);

enum class Outcome { kSpecial, kOdnsOk, kFormErr, kServFail, kRefused };
std::string_view outcome_name(Outcome outcome);

class ResolverEngine {
public:
  ResolverEngine(ResolverConfig cfg, crypto::ResolverKeyPair keypair, Exchange exchange,
                 Rng& rng = system_rng(), Clock clock = nullptr);

  const std::string& name_label() const { return name_label_; }
  const crypto::ResolverKeyPair& keypair() const { return keypair_; }

  struct Result {
    wire::DnsMessage response;
    Outcome outcome = Outcome::kServFail;
    bool cache_hit = false;
    std::optional<net::Endpoint> upstream;
  };

  // `ingress` is the address the query arrived from (the recursive).
  Result handle_query(const wire::DnsMessage& query, const net::Endpoint& ingress);

  // Identity response for "special.<zone>": an OPT option carrying the
  // public key followed by the self-certifying label.
  wire::DnsMessage handle_special_query(const wire::DnsMessage& query) const;

  // First upstream that differs from the ingress address; throws
  // NoSafeUpstream when every configured upstream is the ingress itself.
  net::Endpoint select_upstream(const net::Endpoint& ingress) const;

  // Strips any client-subnet option from a query about to leave; other
  // options are preserved.
  static wire::DnsMessage scrub_outgoing(wire::DnsMessage msg);

  std::size_t cache_size();

private:
  struct CachedAnswer {
    std::uint8_t rcode = 0;
    std::vector<wire::ResourceRecord> records;
    std::chrono::steady_clock::time_point stored_at;
  };
  struct CacheKey {
    std::string qname;
    std::uint16_t qtype;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const {
      return std::hash<std::string>()(k.qname) * 31 + k.qtype;
    }
  };

  Result sealed_reply(const wire::DnsMessage& query, const crypto::SessionKey& session,
                      const crypto::AnswerSet& answers, Outcome outcome, bool cache_hit,
                      std::optional<net::Endpoint> upstream);
  std::optional<crypto::AnswerSet> cached_answer(const CacheKey& key);
  void store_answer(const CacheKey& key, const crypto::AnswerSet& answers);

  ResolverConfig cfg_;
  crypto::ResolverKeyPair keypair_;
  std::string name_label_;
  Exchange exchange_;
  Rng& rng_;
  Clock clock_;

  std::mutex cache_mutex_;
  TtlLruCache<CacheKey, CachedAnswer, CacheKeyHash> cache_;
};

class ResolverService {
public:
  ResolverService(ResolverConfig cfg, crypto::ResolverKeyPair keypair, Rng& rng = system_rng(),
                  std::ostream* log = nullptr);
  ~ResolverService();

  void start();
  void stop();

  net::Endpoint endpoint() const;
  ResolverEngine& engine() { return *engine_; }

private:
  ResolverConfig cfg_;
  std::ostream* log_;
  std::unique_ptr<ResolverEngine> engine_;
  std::unique_ptr<net::UdpServer> server_;
};

// Debug observer used for compatibility probing: answers every A query
// with flag octets describing what actually arrived (client-subnet seen,
// query-name case perturbed, non-OPT additional records present).
class EchoObserverService {
public:
  explicit EchoObserverService(net::Endpoint listen, std::ostream* log = nullptr);
  ~EchoObserverService();

  void start();
  void stop();

  net::Endpoint endpoint() const;

  static wire::DnsMessage observe(const wire::DnsMessage& query);

private:
  net::Endpoint listen_;
  std::ostream* log_;
  std::unique_ptr<net::UdpServer> server_;
};

}  // namespace odns::resolver
