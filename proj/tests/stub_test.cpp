// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/stub.hpp"

#include <gtest/gtest.h>

#include <map>

#include "odns/encoding.hpp"
#include "odns/errors.hpp"
#include "odns/resolver.hpp"
#include "testnet.hpp"

namespace odns::stub {
namespace {

// Engine-level harness: the stub's exchange feeds a real resolver engine
// whose own exchange feeds a synthetic authoritative, all in-process.
class StubEngineTest : public ::testing::Test {
protected:
  StubEngineTest() {
    keypair_ = crypto::ResolverKeyPair::generate(system_rng());
    now_ = std::chrono::steady_clock::now();

    resolver::ResolverConfig rcfg;
    rcfg.zone_suffix = wire::DnsName::from_presentation("odns.test");
    rcfg.upstreams = {net::Endpoint::parse("198.51.100.1:53")};
    auto upstream_exchange = [this](const wire::Bytes& data,
                                    const net::Endpoint&) -> std::optional<wire::Bytes> {
      ++upstream_calls_;
      if (upstream_silent_) return std::nullopt;
      wire::DnsMessage query = wire::decode_message(data);
      wire::DnsMessage response = wire::make_response(query, wire::kRcodeNoError);
      wire::ResourceRecord rr;
      rr.name = query.questions[0].name;
      rr.rtype = wire::kTypeA;
      rr.ttl = upstream_ttl_;
      rr.rdata = testnet::ScriptedUpstream::answer_address(rr.name.presentation());
      response.answers.push_back(std::move(rr));
      return wire::encode_message(response);
    };
    resolver_ = std::make_unique<resolver::ResolverEngine>(
        rcfg, keypair_, upstream_exchange, system_rng(), [this] { return now_; });

    cfg_.recursives = {net::Endpoint::parse("192.0.2.10:53")};
    cfg_.odns_suffix = wire::DnsName::from_presentation("odns.test");
  }

  void make_engine() {
    auto recursive_exchange = [this](const wire::Bytes& data,
                                     const net::Endpoint&) -> std::optional<wire::Bytes> {
      ++recursive_calls_;
      recursive_seen_.push_back(wire::decode_message(data));
      if (recursive_silent_) return std::nullopt;
      auto result = resolver_->handle_query(recursive_seen_.back(), ingress_);
      wire::Bytes out = wire::encode_message(result.response);
      // The sealed answer sits at the end of the datagram; flip its tag.
      if (corrupt_responses_) out[out.size() - 1] ^= 0x40;
      return out;
    };
    engine_ = std::make_unique<StubEngine>(cfg_, recursive_exchange, system_rng(),
                                           [this] { return now_; });
  }

  wire::DnsMessage client_query(const std::string& domain, std::uint16_t id = 1) {
    return wire::make_query(id, wire::DnsName::from_presentation(domain), wire::kTypeA);
  }

  crypto::ResolverKeyPair keypair_;
  std::unique_ptr<resolver::ResolverEngine> resolver_;
  StubConfig cfg_;
  std::unique_ptr<StubEngine> engine_;

  std::chrono::steady_clock::time_point now_;
  net::Endpoint ingress_ = net::Endpoint::parse("192.0.2.10:53");
  int upstream_calls_ = 0;
  int recursive_calls_ = 0;
  std::uint32_t upstream_ttl_ = 300;
  bool upstream_silent_ = false;
  bool recursive_silent_ = false;
  bool corrupt_responses_ = false;
  std::vector<wire::DnsMessage> recursive_seen_;
};

TEST_F(StubEngineTest, BootstrapStoresVerifiedIdentity) {
  make_engine();
  ResolverIdentity identity = engine_->bootstrap_identity();
  EXPECT_EQ(identity.public_key, keypair_.public_key);
  EXPECT_EQ(identity.name_label, crypto::derive_self_certifying_name(keypair_.public_key));
  ASSERT_TRUE(engine_->identity().has_value());
  // The special query itself must carry the client-subnet opt-out.
  ASSERT_EQ(recursive_seen_.size(), 1u);
  auto ecs = wire::find_edns_option(recursive_seen_[0], wire::kOptionClientSubnet);
  ASSERT_TRUE(ecs.has_value());
  EXPECT_TRUE(wire::is_ecs_opt_out(*ecs));
}

TEST_F(StubEngineTest, BootstrapRejectsMismatchedLabel) {
  auto tampering_exchange = [this](const wire::Bytes& data,
                                   const net::Endpoint&) -> std::optional<wire::Bytes> {
    auto result = resolver_->handle_query(wire::decode_message(data), ingress_);
    auto opt = wire::find_edns_option(result.response, wire::kOptionResolverIdentity);
    opt->payload[40] = opt->payload[40] == 'a' ? 'b' : 'a';  // corrupt the label
    return wire::encode_message(wire::with_edns_option(result.response, *opt));
  };
  StubEngine engine(cfg_, tampering_exchange, system_rng());
  EXPECT_THROW(engine.bootstrap_identity(), IdentityVerificationFailure);
  EXPECT_FALSE(engine.identity().has_value());
}

TEST_F(StubEngineTest, BootstrapTimesOut) {
  recursive_silent_ = true;
  make_engine();
  EXPECT_THROW(engine_->bootstrap_identity(), BootstrapTimeout);
}

TEST_F(StubEngineTest, ResolvesThroughOdnsPath) {
  make_engine();
  engine_->bootstrap_identity();
  auto result = engine_->handle_client_query(client_query("www.foo.com", 77));
  EXPECT_EQ(result.outcome, Outcome::kOdnsOk);
  EXPECT_EQ(result.response.id, 77);
  EXPECT_EQ(result.response.flags.rcode(), wire::kRcodeNoError);
  ASSERT_EQ(result.response.answers.size(), 1u);
  EXPECT_EQ(result.response.answers[0].rdata, testnet::ScriptedUpstream::answer_address("www.foo.com"));
  EXPECT_EQ(result.response.answers[0].ttl, 300u);  // true TTL, recovered from the sealed answer
}

TEST_F(StubEngineTest, EmittedQueryIsEncryptedAndCarriesEcs) {
  make_engine();
  engine_->bootstrap_identity();
  engine_->handle_client_query(client_query("secret-domain.example"));
  ASSERT_EQ(recursive_seen_.size(), 2u);  // bootstrap + query
  const wire::DnsMessage& emitted = recursive_seen_[1];
  ASSERT_EQ(emitted.questions.size(), 1u);
  std::string qname = emitted.questions[0].name.presentation();
  EXPECT_TRUE(emitted.questions[0].name.ends_with(cfg_.odns_suffix));
  EXPECT_EQ(qname.find("secret"), std::string::npos);
  auto ecs = wire::find_edns_option(emitted, wire::kOptionClientSubnet);
  ASSERT_TRUE(ecs.has_value());
  EXPECT_TRUE(wire::is_ecs_opt_out(*ecs));
}

TEST_F(StubEngineTest, CacheHitSendsNothingUpstream) {
  make_engine();
  engine_->bootstrap_identity();
  engine_->handle_client_query(client_query("www.foo.com"));
  int calls_after_miss = recursive_calls_;
  auto result = engine_->handle_client_query(client_query("www.foo.com", 99));
  EXPECT_EQ(result.outcome, Outcome::kCacheHit);
  EXPECT_EQ(recursive_calls_, calls_after_miss);
  EXPECT_EQ(result.response.id, 99);
  ASSERT_EQ(result.response.answers.size(), 1u);
}

TEST_F(StubEngineTest, CachedTtlCountsDown) {
  make_engine();
  engine_->bootstrap_identity();
  engine_->handle_client_query(client_query("www.foo.com"));
  now_ += std::chrono::seconds(120);
  auto result = engine_->handle_client_query(client_query("www.foo.com"));
  EXPECT_EQ(result.outcome, Outcome::kCacheHit);
  ASSERT_EQ(result.response.answers.size(), 1u);
  EXPECT_EQ(result.response.answers[0].ttl, 180u);
}

TEST_F(StubEngineTest, CacheEntryExpiresAtTrueTtl) {
  make_engine();
  engine_->bootstrap_identity();
  engine_->handle_client_query(client_query("www.foo.com"));
  int calls_after_miss = recursive_calls_;
  now_ += std::chrono::seconds(301);
  auto result = engine_->handle_client_query(client_query("www.foo.com"));
  EXPECT_EQ(result.outcome, Outcome::kOdnsOk);
  EXPECT_GT(recursive_calls_, calls_after_miss);
}

TEST_F(StubEngineTest, RepeatQueriesUseFreshQnames) {
  make_engine();
  engine_->bootstrap_identity();
  engine_->handle_client_query(client_query("www.foo.com"));
  now_ += std::chrono::seconds(301);  // force a second upstream round
  engine_->handle_client_query(client_query("www.foo.com"));
  ASSERT_EQ(recursive_seen_.size(), 3u);
  EXPECT_NE(recursive_seen_[1].questions[0].name, recursive_seen_[2].questions[0].name);
}

TEST_F(StubEngineTest, CaseInsensitiveCaching) {
  make_engine();
  engine_->bootstrap_identity();
  engine_->handle_client_query(client_query("WWW.Foo.COM"));
  auto result = engine_->handle_client_query(client_query("www.foo.com"));
  EXPECT_EQ(result.outcome, Outcome::kCacheHit);
}

TEST_F(StubEngineTest, UpstreamTimeoutBecomesServfail) {
  make_engine();
  engine_->bootstrap_identity();
  recursive_silent_ = true;
  auto result = engine_->handle_client_query(client_query("www.foo.com"));
  EXPECT_EQ(result.outcome, Outcome::kServFail);
  EXPECT_EQ(result.response.flags.rcode(), wire::kRcodeServFail);
}

TEST_F(StubEngineTest, CorruptedAnswerBecomesServfail) {
  make_engine();
  engine_->bootstrap_identity();
  corrupt_responses_ = true;
  auto result = engine_->handle_client_query(client_query("www.foo.com"));
  EXPECT_EQ(result.outcome, Outcome::kServFail);
}

TEST_F(StubEngineTest, OversizeDomainFallsBackToPlaintext) {
  cfg_.fallback_mode = FallbackMode::kConventional;
  make_engine();
  engine_->bootstrap_identity();
  std::string long_domain(60, 'a');
  long_domain += "." + std::string(60, 'b') + "." + std::string(60, 'c') + ".example.com";
  auto result = engine_->handle_client_query(client_query(long_domain));
  EXPECT_EQ(result.outcome, Outcome::kFallback);
  // The recursive must have seen the query in plaintext, unchanged.
  const wire::DnsMessage& emitted = recursive_seen_.back();
  EXPECT_EQ(emitted.questions[0].name.presentation(), long_domain);
}

TEST_F(StubEngineTest, OversizeDomainAnswersFormerr) {
  cfg_.fallback_mode = FallbackMode::kFormErr;
  make_engine();
  engine_->bootstrap_identity();
  std::string long_domain(60, 'a');
  long_domain += "." + std::string(60, 'b') + "." + std::string(60, 'c') + ".example.com";
  int calls_before = recursive_calls_;
  auto result = engine_->handle_client_query(client_query(long_domain));
  EXPECT_EQ(result.outcome, Outcome::kFormErr);
  EXPECT_EQ(result.response.flags.rcode(), wire::kRcodeFormErr);
  EXPECT_EQ(recursive_calls_, calls_before);  // nothing left the stub
}

TEST_F(StubEngineTest, QueriesBeforeBootstrapFollowFallbackMode) {
  cfg_.fallback_mode = FallbackMode::kFormErr;
  make_engine();
  auto result = engine_->handle_client_query(client_query("www.foo.com"));
  EXPECT_EQ(result.outcome, Outcome::kFormErr);

  cfg_.fallback_mode = FallbackMode::kConventional;
  make_engine();
  result = engine_->handle_client_query(client_query("www.foo.com"));
  EXPECT_EQ(result.outcome, Outcome::kFallback);
}

TEST_F(StubEngineTest, MultiQuestionQueriesAreRejected) {
  make_engine();
  wire::DnsMessage query = client_query("a.test");
  query.questions.push_back(query.questions[0]);
  auto result = engine_->handle_client_query(query);
  EXPECT_EQ(result.outcome, Outcome::kFormErr);
}

TEST(SelectRecursive, SingleModeAlwaysFirst) {
  StubConfig cfg;
  cfg.recursives = {net::Endpoint::parse("192.0.2.1:53"), net::Endpoint::parse("192.0.2.2:53")};
  cfg.odns_suffix = wire::DnsName::from_presentation("odns.test");
  cfg.striping = Striping::kSingle;
  StubEngine engine(cfg, [](const wire::Bytes&, const net::Endpoint&) { return std::nullopt; });
  for (std::uint64_t c : {0, 1, 17, 1000}) {
    EXPECT_EQ(engine.select_recursive(c), cfg.recursives[0]);
  }
}

TEST(SelectRecursive, RoundRobinAlternates) {
  StubConfig cfg;
  cfg.recursives = {net::Endpoint::parse("192.0.2.1:53"), net::Endpoint::parse("192.0.2.2:53")};
  cfg.odns_suffix = wire::DnsName::from_presentation("odns.test");
  cfg.striping = Striping::kRoundRobin;
  StubEngine engine(cfg, [](const wire::Bytes&, const net::Endpoint&) { return std::nullopt; });
  EXPECT_EQ(engine.select_recursive(0), cfg.recursives[0]);
  EXPECT_EQ(engine.select_recursive(1), cfg.recursives[1]);
  EXPECT_EQ(engine.select_recursive(2), cfg.recursives[0]);
  EXPECT_EQ(engine.select_recursive(3), cfg.recursives[1]);
}

TEST(SelectRecursive, RoundRobinIsBalanced) {
  StubConfig cfg;
  cfg.recursives = {net::Endpoint::parse("192.0.2.1:53"), net::Endpoint::parse("192.0.2.2:53"),
                    net::Endpoint::parse("192.0.2.3:53")};
  cfg.odns_suffix = wire::DnsName::from_presentation("odns.test");
  cfg.striping = Striping::kRoundRobin;
  StubEngine engine(cfg, [](const wire::Bytes&, const net::Endpoint&) { return std::nullopt; });
  std::map<std::string, int> uses;
  for (std::uint64_t c = 0; c < 300; ++c) ++uses[engine.select_recursive(c).to_string()];
  for (const auto& [addr, count] : uses) EXPECT_EQ(count, 100) << addr;
}

}  // namespace
}  // namespace odns::stub
