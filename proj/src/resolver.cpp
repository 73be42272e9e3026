// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/resolver.hpp"

#include <sys/stat.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "odns/config.hpp"
#include "odns/errors.hpp"
#include "odns/logging.hpp"

namespace odns::resolver {

namespace {

constexpr std::chrono::seconds kNegativeTtl(30);
constexpr char kSpecialLabel[] = "special";

std::chrono::steady_clock::time_point default_now() { return std::chrono::steady_clock::now(); }

std::uint32_t min_ttl(const std::vector<wire::ResourceRecord>& records) {
  std::uint32_t ttl = 0xffffffff;
  for (const auto& rr : records) ttl = std::min(ttl, rr.ttl);
  return ttl;
}

bool is_special(const wire::DnsName& name, const wire::DnsName& zone) {
  if (name.label_count() != zone.label_count() + 1) return false;
  if (!name.ends_with(zone)) return false;
  std::string first = name.labels().front();
  std::transform(first.begin(), first.end(), first.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return first == kSpecialLabel;
}

}  // namespace

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSpecial: return "special";
    case Outcome::kOdnsOk: return "odns_ok";
    case Outcome::kFormErr: return "formerr";
    case Outcome::kServFail: return "servfail";
    case Outcome::kRefused: return "refused";
  }
  return "unknown";
}

void ResolverConfig::validate() const {
  if (zone_suffix.is_root()) throw ConfigError("zone_suffix is required");
  if (upstreams.empty()) throw ConfigError("at least one upstream address is required");
  if (query_timeout.count() <= 0) throw ConfigError("query_timeout must be positive");
}

ResolverConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  ResolverConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "listen_address") {
      cfg.listen = net::Endpoint::parse(value, 5301);
    } else if (key == "zone_suffix") {
      cfg.zone_suffix = wire::DnsName::from_presentation(value).lowered();
    } else if (key == "keypair_path") {
      cfg.keypair_path = value;
    } else if (key == "upstream_addresses") {
      cfg.upstreams.clear();
      for (const auto& item : config::split_list(value)) {
        cfg.upstreams.push_back(net::Endpoint::parse(item, 53));
      }
    } else if (key == "cache_capacity") {
      cfg.cache_capacity = std::stoull(value);
    } else if (key == "query_timeout") {
      cfg.query_timeout = config::parse_duration(value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return cfg;
}

void save_keypair(const crypto::ResolverKeyPair& kp, const std::string& path) {
  // Write with restrictive permissions before any key byte lands on disk.
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw FileNotFound(path);
  ::chmod(path.c_str(), 0600);
  bool ok = std::fwrite(kp.secret_key.data(), 1, 32, f) == 32 &&
            std::fwrite(kp.public_key.data(), 1, 32, f) == 32;
  std::fclose(f);
  if (!ok) throw Error("short write to " + path);
}

crypto::ResolverKeyPair load_keypair(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path);
  std::array<std::uint8_t, 64> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (in.gcount() != 64) throw Error("keypair file must be exactly 64 bytes: " + path);
  auto kp = crypto::ResolverKeyPair::from_secret(std::span(raw).first(32));
  if (!std::equal(kp.public_key.begin(), kp.public_key.end(), raw.begin() + 32)) {
    throw InvalidPublicKey("stored public key does not match the secret");
  }
  return kp;
}

ResolverEngine::ResolverEngine(ResolverConfig cfg, crypto::ResolverKeyPair keypair, Exchange exchange,
                               Rng& rng, Clock clock)
    : cfg_(std::move(cfg)),
      keypair_(keypair),
      name_label_(crypto::derive_self_certifying_name(keypair.public_key)),
      exchange_(std::move(exchange)),
      rng_(rng),
      clock_(clock ? std::move(clock) : default_now),
      cache_(cfg_.cache_capacity) {
  cfg_.validate();
}

wire::DnsMessage ResolverEngine::handle_special_query(const wire::DnsMessage& query) const {
  wire::DnsMessage response = wire::make_response(query, wire::kRcodeNoError);
  wire::Bytes payload(keypair_.public_key.begin(), keypair_.public_key.end());
  payload.insert(payload.end(), name_label_.begin(), name_label_.end());
  return wire::with_edns_option(std::move(response),
                                wire::EdnsOption{wire::kOptionResolverIdentity, std::move(payload)});
}

net::Endpoint ResolverEngine::select_upstream(const net::Endpoint& ingress) const {
  for (const auto& upstream : cfg_.upstreams) {
    if (!(upstream == ingress)) return upstream;
  }
  throw NoSafeUpstream("every upstream equals the ingress " + ingress.to_string());
}

wire::DnsMessage ResolverEngine::scrub_outgoing(wire::DnsMessage msg) {
  return wire::without_edns_option(std::move(msg), wire::kOptionClientSubnet);
}

std::size_t ResolverEngine::cache_size() {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

std::optional<crypto::AnswerSet> ResolverEngine::cached_answer(const CacheKey& key) {
  std::lock_guard lock(cache_mutex_);
  auto hit = cache_.get(key, clock_());
  if (!hit) return std::nullopt;
  crypto::AnswerSet answers;
  answers.rcode = hit->rcode;
  auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(clock_() - hit->stored_at).count();
  for (auto rr : hit->records) {
    rr.ttl -= static_cast<std::uint32_t>(std::min<long long>(elapsed, rr.ttl));
    answers.records.push_back(std::move(rr));
  }
  return answers;
}

void ResolverEngine::store_answer(const CacheKey& key, const crypto::AnswerSet& answers) {
  if (answers.rcode == wire::kRcodeServFail) return;
  auto now = clock_();
  auto expiry = answers.records.empty() || answers.rcode != wire::kRcodeNoError
                    ? now + kNegativeTtl
                    : now + std::chrono::seconds(min_ttl(answers.records));
  std::lock_guard lock(cache_mutex_);
  cache_.put(key, CachedAnswer{answers.rcode, answers.records, now}, expiry);
}

ResolverEngine::Result ResolverEngine::sealed_reply(const wire::DnsMessage& query,
                                                    const crypto::SessionKey& session,
                                                    const crypto::AnswerSet& answers, Outcome outcome,
                                                    bool cache_hit,
                                                    std::optional<net::Endpoint> upstream) {
  // The answer section stays empty; the sealed record set rides in the OPT
  // option and every outer RR carries TTL 0.
  crypto::SealedAnswer sealed = crypto::seal_answer(answers, session, rng_);
  wire::DnsMessage response = wire::make_response(query, wire::kRcodeNoError);
  response = wire::with_edns_option(
      std::move(response), wire::EdnsOption{wire::kOptionSealedAnswer, sealed.serialize()});
  return Result{std::move(response), outcome, cache_hit, upstream};
}

ResolverEngine::Result ResolverEngine::handle_query(const wire::DnsMessage& query,
                                                    const net::Endpoint& ingress) {
  if (query.questions.size() != 1) {
    return Result{wire::make_response(query, wire::kRcodeFormErr), Outcome::kFormErr, false, {}};
  }
  const wire::Question& question = query.questions.front();

  if (is_special(question.name, cfg_.zone_suffix)) {
    return Result{handle_special_query(query), Outcome::kSpecial, false, {}};
  }
  if (!question.name.lowered().ends_with(cfg_.zone_suffix)) {
    return Result{wire::make_response(query, wire::kRcodeRefused), Outcome::kRefused, false, {}};
  }

  crypto::SessionKey session;
  std::string domain;
  try {
    // Encoded labels are case-sensitive, so the name is parsed as received.
    auto parsed = crypto::parse_odns_qname(question.name, cfg_.zone_suffix);
    session = crypto::unwrap_key(parsed.wrapped_key, keypair_.secret_key);
    domain = crypto::open_domain(parsed.sealed_domain, session);
  } catch (const NotOdnsQuery&) {
    return Result{wire::make_response(query, wire::kRcodeRefused), Outcome::kRefused, false, {}};
  } catch (const Error&) {
    // Undecryptable or structurally broken: answer FORMERR without any
    // upstream traffic.
    return Result{wire::make_response(query, wire::kRcodeFormErr), Outcome::kFormErr, false, {}};
  }

  wire::DnsName domain_name;
  try {
    domain_name = wire::DnsName::from_presentation(domain).lowered();
  } catch (const Error&) {
    return Result{wire::make_response(query, wire::kRcodeFormErr), Outcome::kFormErr, false, {}};
  }

  CacheKey key{domain_name.presentation(), question.qtype};
  if (auto answers = cached_answer(key)) {
    return sealed_reply(query, session, *answers, Outcome::kOdnsOk, true, std::nullopt);
  }

  net::Endpoint upstream;
  try {
    upstream = select_upstream(ingress);
  } catch (const NoSafeUpstream&) {
    return sealed_reply(query, session, crypto::AnswerSet{wire::kRcodeServFail, {}},
                        Outcome::kServFail, false, std::nullopt);
  }

  wire::DnsMessage plain_query = wire::make_query(rng_.next_u16(), domain_name, question.qtype);
  plain_query = scrub_outgoing(std::move(plain_query));

  auto reply = exchange_(wire::encode_message(plain_query), upstream);
  if (!reply) {
    return sealed_reply(query, session, crypto::AnswerSet{wire::kRcodeServFail, {}},
                        Outcome::kServFail, false, upstream);
  }

  crypto::AnswerSet answers;
  try {
    wire::DnsMessage upstream_response = wire::decode_message(*reply);
    answers.rcode = upstream_response.flags.rcode();
    answers.records = upstream_response.answers;
  } catch (const Error&) {
    return sealed_reply(query, session, crypto::AnswerSet{wire::kRcodeServFail, {}},
                        Outcome::kServFail, false, upstream);
  }

  store_answer(key, answers);
  try {
    return sealed_reply(query, session, answers, Outcome::kOdnsOk, false, upstream);
  } catch (const PayloadOversize&) {
    return sealed_reply(query, session, crypto::AnswerSet{wire::kRcodeServFail, {}},
                        Outcome::kServFail, false, upstream);
  }
}

ResolverService::ResolverService(ResolverConfig cfg, crypto::ResolverKeyPair keypair, Rng& rng,
                                 std::ostream* log)
    : cfg_(cfg), log_(log) {
  cfg_.validate();
  auto exchange = [timeout = cfg_.query_timeout](const wire::Bytes& data, const net::Endpoint& to) {
    return net::udp_exchange(data, to, timeout);
  };
  engine_ = std::make_unique<ResolverEngine>(cfg_, keypair, exchange, rng);
}

ResolverService::~ResolverService() { stop(); }

net::Endpoint ResolverService::endpoint() const { return server_->local_endpoint(); }

void ResolverService::start() {
  server_ = std::make_unique<net::UdpServer>(cfg_.listen);
  server_->start([this](const wire::Bytes& data, const net::Endpoint& peer) -> std::optional<wire::Bytes> {
    auto started = std::chrono::steady_clock::now();
    wire::DnsMessage query;
    try {
      query = wire::decode_message(data);
    } catch (const Error&) {
      return std::nullopt;
    }
    auto result = engine_->handle_query(query, peer);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    log_line(log_, {{"outcome", std::string(outcome_name(result.outcome))},
                    {"upstream", result.upstream ? result.upstream->to_string() : "-"},
                    {"cache", result.cache_hit ? "hit" : "miss"},
                    {"latency_us", std::to_string(micros)}});
    return wire::encode_message(result.response);
  });
}

void ResolverService::stop() {
  if (server_) server_->stop();
}

EchoObserverService::EchoObserverService(net::Endpoint listen, std::ostream* log)
    : listen_(listen), log_(log) {}

EchoObserverService::~EchoObserverService() { stop(); }

net::Endpoint EchoObserverService::endpoint() const { return server_->local_endpoint(); }

wire::DnsMessage EchoObserverService::observe(const wire::DnsMessage& query) {
  wire::DnsMessage response = wire::make_response(query, wire::kRcodeNoError);
  if (query.questions.empty()) return response;
  const wire::Question& question = query.questions.front();

  bool saw_ecs = wire::find_edns_option(query, wire::kOptionClientSubnet).has_value();
  bool case_perturbed = question.name != question.name.lowered();
  bool saw_additional = std::any_of(query.additionals.begin(), query.additionals.end(),
                                    [](const wire::ResourceRecord& rr) { return rr.rtype != wire::kTypeOpt; });

  wire::ResourceRecord rr;
  rr.name = question.name;
  rr.rtype = wire::kTypeA;
  rr.rclass = wire::kClassIn;
  rr.ttl = 0;
  rr.rdata = {127, static_cast<std::uint8_t>(saw_ecs), static_cast<std::uint8_t>(case_perturbed),
              static_cast<std::uint8_t>(saw_additional)};
  response.answers.push_back(std::move(rr));
  return response;
}

void EchoObserverService::start() {
  server_ = std::make_unique<net::UdpServer>(listen_);
  server_->start([this](const wire::Bytes& data, const net::Endpoint&) -> std::optional<wire::Bytes> {
    wire::DnsMessage query;
    try {
      query = wire::decode_message(data);
    } catch (const Error&) {
      return std::nullopt;
    }
    wire::DnsMessage response = observe(query);
    if (!query.questions.empty() && !response.answers.empty()) {
      const auto& flags = response.answers.front().rdata;
      log_line(log_, {{"event", "observe"},
                      {"qname", query.questions.front().name.presentation()},
                      {"ecs", std::to_string(flags[1])},
                      {"case_perturbed", std::to_string(flags[2])},
                      {"additional", std::to_string(flags[3])}});
    }
    return wire::encode_message(response);
  });
}

void EchoObserverService::stop() {
  if (server_) server_->stop();
}

}  // namespace odns::resolver
