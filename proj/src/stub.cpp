// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/stub.hpp"

#include <algorithm>

#include "odns/config.hpp"
#include "odns/errors.hpp"
#include "odns/logging.hpp"

namespace odns::stub {

namespace {

constexpr std::chrono::seconds kNegativeTtl(30);
constexpr char kSpecialLabel[] = "special";

std::chrono::steady_clock::time_point default_now() { return std::chrono::steady_clock::now(); }

std::uint32_t min_ttl(const std::vector<wire::ResourceRecord>& records) {
  std::uint32_t ttl = 0xffffffff;
  for (const auto& rr : records) ttl = std::min(ttl, rr.ttl);
  return ttl;
}

}  // namespace

FallbackMode parse_fallback_mode(std::string_view text) {
  if (text == "conventional") return FallbackMode::kConventional;
  if (text == "formerr") return FallbackMode::kFormErr;
  throw ConfigError("fallback_mode must be 'conventional' or 'formerr'");
}

Striping parse_striping(std::string_view text) {
  if (text == "single") return Striping::kSingle;
  if (text == "round_robin") return Striping::kRoundRobin;
  throw ConfigError("striping must be 'single' or 'round_robin'");
}

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kCacheHit: return "cache_hit";
    case Outcome::kOdnsOk: return "odns_ok";
    case Outcome::kFallback: return "fallback";
    case Outcome::kFormErr: return "formerr";
    case Outcome::kServFail: return "servfail";
  }
  return "unknown";
}

void StubConfig::validate() const {
  if (recursives.empty()) throw ConfigError("at least one recursive address is required");
  if (odns_suffix.is_root()) throw ConfigError("odns_suffix is required");
  if (bootstrap_refresh.count() <= 0) throw ConfigError("bootstrap_refresh_interval must be positive");
  if (query_timeout.count() <= 0) throw ConfigError("query_timeout must be positive");
}

StubConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  StubConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "listen_address") {
      cfg.listen = net::Endpoint::parse(value, 5300);
    } else if (key == "recursive_addresses") {
      cfg.recursives.clear();
      for (const auto& item : config::split_list(value)) {
        cfg.recursives.push_back(net::Endpoint::parse(item, 53));
      }
    } else if (key == "odns_suffix") {
      cfg.odns_suffix = wire::DnsName::from_presentation(value).lowered();
    } else if (key == "fallback_mode") {
      cfg.fallback_mode = parse_fallback_mode(value);
    } else if (key == "striping") {
      cfg.striping = parse_striping(value);
    } else if (key == "bootstrap_refresh_interval") {
      cfg.bootstrap_refresh = config::parse_duration(value);
    } else if (key == "query_timeout") {
      cfg.query_timeout = config::parse_duration(value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return cfg;
}

StubEngine::StubEngine(StubConfig cfg, Exchange exchange, Rng& rng, Clock clock)
    : cfg_(std::move(cfg)),
      exchange_(std::move(exchange)),
      rng_(rng),
      clock_(clock ? std::move(clock) : default_now),
      cache_(0) {
  cfg_.validate();
}

net::Endpoint StubEngine::select_recursive(std::uint64_t counter) const {
  if (cfg_.striping == Striping::kSingle) return cfg_.recursives.front();
  return cfg_.recursives[counter % cfg_.recursives.size()];
}

ResolverIdentity StubEngine::bootstrap_identity() {
  wire::DnsName qname =
      wire::DnsName::from_labels({kSpecialLabel}).appended(cfg_.odns_suffix);
  wire::DnsMessage query = wire::make_query(rng_.next_u16(), qname, wire::kTypeA);
  query = wire::with_edns_option(std::move(query), wire::make_ecs_opt_out());
  auto reply = exchange_(wire::encode_message(query), cfg_.recursives.front());
  if (!reply) throw BootstrapTimeout("no answer to the special query");

  wire::DnsMessage response = wire::decode_message(*reply);
  auto opt = wire::find_edns_option(response, wire::kOptionResolverIdentity);
  if (!opt || opt->payload.size() != 32 + crypto::kSelfCertifyingLabelLength) {
    throw IdentityVerificationFailure("identity option missing or truncated");
  }

  ResolverIdentity identity;
  std::copy_n(opt->payload.begin(), 32, identity.public_key.begin());
  identity.name_label.assign(opt->payload.begin() + 32, opt->payload.end());
  if (crypto::derive_self_certifying_name(identity.public_key) != identity.name_label) {
    throw IdentityVerificationFailure("label does not match the public key");
  }
  identity.obtained_at = clock_();

  std::lock_guard lock(identity_mutex_);
  identity_ = identity;
  return identity;
}

std::optional<ResolverIdentity> StubEngine::identity() const {
  std::lock_guard lock(identity_mutex_);
  return identity_;
}

std::size_t StubEngine::cache_size() {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

std::optional<wire::DnsMessage> StubEngine::cached_response(const wire::DnsMessage& query,
                                                            const CacheKey& key) {
  std::lock_guard lock(cache_mutex_);
  auto hit = cache_.get(key, clock_());
  if (!hit) return std::nullopt;
  wire::DnsMessage response = wire::make_response(query, hit->rcode);
  auto elapsed =
      std::chrono::duration_cast<std::chrono::seconds>(clock_() - hit->stored_at).count();
  for (auto rr : hit->records) {
    rr.ttl -= static_cast<std::uint32_t>(std::min<long long>(elapsed, rr.ttl));
    response.answers.push_back(std::move(rr));
  }
  return response;
}

void StubEngine::store_answer(const CacheKey& key, const crypto::AnswerSet& answers) {
  if (answers.rcode == wire::kRcodeServFail) return;
  auto now = clock_();
  auto expiry = answers.records.empty() || answers.rcode != wire::kRcodeNoError
                    ? now + kNegativeTtl
                    : now + std::chrono::seconds(min_ttl(answers.records));
  std::lock_guard lock(cache_mutex_);
  cache_.put(key, CachedAnswer{answers.rcode, answers.records, now}, expiry);
}

StubEngine::Result StubEngine::handle_client_query(const wire::DnsMessage& query) {
  if (query.questions.size() != 1) {
    return Result{wire::make_response(query, wire::kRcodeFormErr), Outcome::kFormErr};
  }
  const wire::Question& question = query.questions.front();
  CacheKey key{question.name.lowered().presentation(), question.qtype};

  if (auto response = cached_response(query, key)) {
    return Result{std::move(*response), Outcome::kCacheHit};
  }

  auto identity = this->identity();
  if (!identity) return fallback(query);

  crypto::SessionKey session = crypto::generate_session_key(rng_);
  crypto::OdnsQname qname;
  try {
    qname = crypto::build_odns_qname(key.qname, session, identity->public_key,
                                     identity->name_label, cfg_.odns_suffix, rng_);
  } catch (const QnameOversize&) {
    return fallback(query);
  }

  wire::DnsMessage odns_query = wire::make_query(rng_.next_u16(), qname.to_name(), question.qtype);
  odns_query = wire::with_edns_option(std::move(odns_query), wire::make_ecs_opt_out());

  net::Endpoint recursive = select_recursive(query_counter_.fetch_add(1));
  auto reply = exchange_(wire::encode_message(odns_query), recursive);
  if (!reply) return Result{wire::make_response(query, wire::kRcodeServFail), Outcome::kServFail};

  crypto::AnswerSet answers;
  try {
    wire::DnsMessage response = wire::decode_message(*reply);
    if (response.flags.tc() || response.flags.rcode() != wire::kRcodeNoError) {
      return Result{wire::make_response(query, wire::kRcodeServFail), Outcome::kServFail};
    }
    auto opt = wire::find_edns_option(response, wire::kOptionSealedAnswer);
    if (!opt) throw MalformedMessage("sealed answer option missing");
    answers = crypto::open_answer(crypto::SealedAnswer::deserialize(opt->payload), session);
  } catch (const Error&) {
    return Result{wire::make_response(query, wire::kRcodeServFail), Outcome::kServFail};
  }

  store_answer(key, answers);

  wire::DnsMessage response = wire::make_response(query, answers.rcode);
  response.answers = answers.records;
  Outcome outcome = answers.rcode == wire::kRcodeServFail ? Outcome::kServFail : Outcome::kOdnsOk;
  return Result{std::move(response), outcome};
}

StubEngine::Result StubEngine::fallback(const wire::DnsMessage& query) {
  if (cfg_.fallback_mode == FallbackMode::kFormErr) {
    return Result{wire::make_response(query, wire::kRcodeFormErr), Outcome::kFormErr};
  }
  // Transparent conventional lookup: the query goes out unchanged and the
  // upstream response is relayed as-is.
  net::Endpoint recursive = select_recursive(query_counter_.fetch_add(1));
  auto reply = exchange_(wire::encode_message(query), recursive);
  if (!reply) return Result{wire::make_response(query, wire::kRcodeServFail), Outcome::kServFail};
  try {
    return Result{wire::decode_message(*reply), Outcome::kFallback};
  } catch (const Error&) {
    return Result{wire::make_response(query, wire::kRcodeServFail), Outcome::kServFail};
  }
}

StubService::StubService(StubConfig cfg, Rng& rng, std::ostream* log) : cfg_(cfg), log_(log) {
  cfg_.validate();
  auto exchange = [timeout = cfg_.query_timeout](const wire::Bytes& data,
                                                 const net::Endpoint& to) {
    return net::udp_exchange(data, to, timeout);
  };
  engine_ = std::make_unique<StubEngine>(cfg_, exchange, rng);
}

StubService::~StubService() { stop(); }

net::Endpoint StubService::endpoint() const { return server_->local_endpoint(); }

bool StubService::try_bootstrap() {
  try {
    engine_->bootstrap_identity();
    log_line(log_, {{"event", "bootstrap"}, {"status", "ok"}});
    return true;
  } catch (const Error& e) {
    log_line(log_, {{"event", "bootstrap"}, {"status", "failed"}, {"error", e.what()}});
    return false;
  }
}

void StubService::start() {
  server_ = std::make_unique<net::UdpServer>(cfg_.listen);
  try_bootstrap();
  refresh_thread_ = std::jthread([this](std::stop_token st) { refresh_loop(st); });
  server_->start([this](const wire::Bytes& data, const net::Endpoint&) -> std::optional<wire::Bytes> {
    auto started = std::chrono::steady_clock::now();
    wire::DnsMessage query;
    try {
      query = wire::decode_message(data);
    } catch (const Error&) {
      return std::nullopt;  // not DNS; nothing sane to answer
    }
    auto result = engine_->handle_client_query(query);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    log_line(log_, {{"outcome", std::string(outcome_name(result.outcome))},
                    {"latency_us", std::to_string(micros)}});
    return wire::encode_message(result.response);
  });
}

void StubService::refresh_loop(std::stop_token st) {
  // Re-run key distribution on the configured interval; after a failure,
  // retry sooner so a recovering resolver is picked up quickly.
  constexpr std::chrono::seconds kRetryDelay(5);
  while (!st.stop_requested()) {
    auto identity = engine_->identity();
    std::chrono::milliseconds wait = cfg_.bootstrap_refresh;
    if (identity) {
      auto age = std::chrono::steady_clock::now() - identity->obtained_at;
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::max<std::chrono::steady_clock::duration>(cfg_.bootstrap_refresh - age,
                                                        std::chrono::milliseconds(10)));
    } else {
      wait = kRetryDelay;
    }
    std::unique_lock lock(refresh_mutex_);
    if (refresh_cv_.wait_for(lock, st, wait, [&st] { return st.stop_requested(); })) return;
    lock.unlock();
    auto current = engine_->identity();
    if (!current || std::chrono::steady_clock::now() - current->obtained_at >= cfg_.bootstrap_refresh) {
      try_bootstrap();
    }
  }
}

void StubService::stop() {
  if (refresh_thread_.joinable()) {
    refresh_thread_.request_stop();
    refresh_cv_.notify_all();
    refresh_thread_.join();
  }
  if (server_) server_->stop();
}

}  // namespace odns::stub
