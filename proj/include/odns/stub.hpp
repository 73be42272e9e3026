// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// Client-side stub: answers conventional DNS queries from a local cache or
// by transforming them into encrypted queries toward a recursive resolver,
// decrypting the sealed answers, and caching by their true TTLs.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "odns/cache.hpp"
#include "odns/crypto.hpp"
#include "odns/net.hpp"
#include "odns/rng.hpp"
#include "odns/wire.hpp"

namespace odns::stub {

enum class FallbackMode { kConventional, kFormErr };
enum class Striping { kSingle, kRoundRobin };

FallbackMode parse_fallback_mode(std::string_view text);
Striping parse_striping(std::string_view text);

struct StubConfig {
  net::Endpoint listen = net::loopback(5300);
  std::vector<net::Endpoint> recursives;  // at least one
  wire::DnsName odns_suffix;
  FallbackMode fallback_mode = FallbackMode::kConventional;
  Striping striping = Striping::kSingle;
  std::chrono::milliseconds bootstrap_refresh = std::chrono::hours(7 * 24);
  std::chrono::milliseconds query_timeout = std::chrono::milliseconds(2000);

  void validate() const;  // throws ConfigError
};

// Builds a config from `key = value` pairs; unknown keys are rejected.
StubConfig config_from_kv(const std::map<std::string, std::string>& kv);

// Resolver identity obtained through the special bootstrap query. The name
// label is verified against the public key on receipt.
struct ResolverIdentity {
  std::array<std::uint8_t, 32> public_key{};
  std::string name_label;
  std::chrono::steady_clock::time_point obtained_at{};
};

enum class Outcome { kCacheHit, kOdnsOk, kFallback, kFormErr, kServFail };
std::string_view outcome_name(Outcome outcome);

// One request/response round trip; nullopt on timeout (after retry).
using Exchange =
    std::function<std::optional<wire::Bytes>(const wire::Bytes&, const net::Endpoint&)>;
using Clock = std::function<std::chrono::steady_clock::time_point()>;

class StubEngine {
public:
  StubEngine(StubConfig cfg, Exchange exchange, Rng& rng = system_rng(), Clock clock = nullptr);

  const StubConfig& config() const { return cfg_; }

  // Sends the special query, verifies the self-certifying label against the
  // returned key, and stores the identity. Throws BootstrapTimeout or
  // IdentityVerificationFailure.
  ResolverIdentity bootstrap_identity();

  std::optional<ResolverIdentity> identity() const;

  struct Result {
    wire::DnsMessage response;
    Outcome outcome = Outcome::kServFail;
  };

  Result handle_client_query(const wire::DnsMessage& query);

  // single: always the first address; round_robin: counter mod list size.
  net::Endpoint select_recursive(std::uint64_t counter) const;

  std::size_t cache_size();

private:
  struct CachedAnswer {
    std::uint8_t rcode = 0;
    std::vector<wire::ResourceRecord> records;  // original TTLs
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

  Result fallback(const wire::DnsMessage& query);
  Result odns_resolve(const wire::DnsMessage& query, const ResolverIdentity& identity);
  void store_answer(const CacheKey& key, const crypto::AnswerSet& answers);
  std::optional<wire::DnsMessage> cached_response(const wire::DnsMessage& query, const CacheKey& key);

  StubConfig cfg_;
  Exchange exchange_;
  Rng& rng_;
  Clock clock_;

  mutable std::mutex identity_mutex_;
  std::optional<ResolverIdentity> identity_;

  std::mutex cache_mutex_;
  TtlLruCache<CacheKey, CachedAnswer, CacheKeyHash> cache_;

  std::atomic<std::uint64_t> query_counter_{0};
};

// UDP daemon around the engine: listener, initial bootstrap, periodic
// identity refresh, one structured log line per query.
class StubService {
public:
  explicit StubService(StubConfig cfg, Rng& rng = system_rng(), std::ostream* log = nullptr);
  ~StubService();

  // Binds the listener and starts serving. The initial bootstrap attempt is
  // best-effort: until it succeeds, queries follow the fallback mode.
  void start();
  void stop();

  bool try_bootstrap();

  net::Endpoint endpoint() const;
  StubEngine& engine() { return *engine_; }

private:
  void refresh_loop(std::stop_token st);

  StubConfig cfg_;
  std::ostream* log_;
  std::unique_ptr<StubEngine> engine_;
  std::unique_ptr<net::UdpServer> server_;
  std::jthread refresh_thread_;
  std::mutex refresh_mutex_;
  std::condition_variable_any refresh_cv_;
};

}  // namespace odns::stub
