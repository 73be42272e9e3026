// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/wire.hpp"

#include <gtest/gtest.h>

#include <random>

#include "odns/errors.hpp"

namespace odns::wire {
namespace {

Bytes from_hex(std::string_view hex) {
  Bytes out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  }
  return out;
}

// Frozen reference bytes, produced with an independent encoder that lays
// out the RFC 1035 fields directly.
constexpr char kQueryWwwFooCom[] = "1234010000010000000000000377777703666f6f03636f6d0000010001";
constexpr char kResponseExampleCom[] =
    "abcd81800001000100000000076578616d706c6503636f6d0000010001c00c000100010000012c00045db8d822";

TEST(DnsName, WireBytesMatchReference) {
  DnsMessage msg;
  msg.id = 0x1234;
  msg.flags.set_rd(true);
  msg.questions.push_back(Question{DnsName::from_presentation("www.foo.com"), kTypeA, kClassIn});
  EXPECT_EQ(encode_message(msg), from_hex(kQueryWwwFooCom));
}

TEST(DnsName, EmptyAnswerListEncodesCountZero) {
  DnsMessage msg;
  msg.questions.push_back(Question{DnsName::from_presentation("a.b"), kTypeA, kClassIn});
  Bytes bytes = encode_message(msg);
  EXPECT_EQ(bytes[6], 0);  // ancount
  EXPECT_EQ(bytes[7], 0);
}

TEST(DnsName, RejectsOversizeLabel) {
  std::string big(64, 'a');
  EXPECT_THROW(DnsName::from_presentation(big + ".com"), OversizeName);
  EXPECT_THROW(DnsName::from_labels({big}), OversizeName);
  // 63 bytes is still fine.
  EXPECT_NO_THROW(DnsName::from_presentation(std::string(63, 'a') + ".com"));
}

TEST(DnsName, RejectsOversizePresentation) {
  // 25 9-char labels + 3 = 253 presentation chars: one too many.
  std::string long_name;
  for (int i = 0; i < 25; ++i) long_name += "abcdefghi.";
  long_name += "abc";
  EXPECT_EQ(long_name.size(), 253u);
  EXPECT_THROW(DnsName::from_presentation(long_name), OversizeName);
  EXPECT_NO_THROW(DnsName::from_presentation(long_name.substr(1)));
}

TEST(DnsName, PresentationRoundTrip) {
  auto name = DnsName::from_presentation("www.Example.COM");
  EXPECT_EQ(name.presentation(), "www.Example.COM");
  EXPECT_EQ(name.lowered().presentation(), "www.example.com");
  EXPECT_EQ(name.label_count(), 3u);
  EXPECT_EQ(name.wire_length(), 17u);
}

TEST(DnsName, SuffixOperations) {
  auto name = DnsName::from_presentation("a.b.odns.test");
  auto suffix = DnsName::from_presentation("odns.test");
  EXPECT_TRUE(name.ends_with(suffix));
  EXPECT_EQ(name.without_suffix(suffix).presentation(), "a.b");
  EXPECT_FALSE(DnsName::from_presentation("a.b.other.test").ends_with(suffix));
  EXPECT_EQ(DnsName::from_presentation("a.b").appended(suffix), name);
}

TEST(Decode, TruncatedHeaderIsMalformed) {
  Bytes short_msg{0x12, 0x34, 0x01, 0x00};
  EXPECT_THROW(decode_message(short_msg), MalformedMessage);
}

TEST(Decode, ReferenceResponseWithCompression) {
  DnsMessage msg = decode_message(from_hex(kResponseExampleCom));
  EXPECT_EQ(msg.id, 0xabcd);
  EXPECT_TRUE(msg.flags.qr());
  EXPECT_TRUE(msg.flags.rd());
  EXPECT_TRUE(msg.flags.ra());
  EXPECT_EQ(msg.flags.rcode(), kRcodeNoError);
  ASSERT_EQ(msg.questions.size(), 1u);
  EXPECT_EQ(msg.questions[0].name.presentation(), "example.com");
  ASSERT_EQ(msg.answers.size(), 1u);
  // The answer name is a pointer back to the question name.
  EXPECT_EQ(msg.answers[0].name.presentation(), "example.com");
  EXPECT_EQ(msg.answers[0].ttl, 300u);
  EXPECT_EQ(msg.answers[0].rdata, (Bytes{93, 184, 216, 34}));
}

TEST(Decode, RejectsForwardPointer) {
  // Question name is a pointer to itself.
  Bytes msg = from_hex("000000000001000000000000");
  msg.push_back(0xc0);
  msg.push_back(0x0c);
  msg.push_back(0x00);
  msg.push_back(0x01);
  msg.push_back(0x00);
  msg.push_back(0x01);
  EXPECT_THROW(decode_message(msg), MalformedMessage);
}

DnsMessage random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> label_len(1, 12);
  std::uniform_int_distribution<int> label_count(1, 5);
  std::uniform_int_distribution<int> rr_count(0, 3);
  std::uniform_int_distribution<int> byte(0, 255);

  auto random_name = [&] {
    std::vector<std::string> labels;
    int n = label_count(rng);
    for (int i = 0; i < n; ++i) {
      std::string label;
      int len = label_len(rng);
      for (int j = 0; j < len; ++j) label.push_back("abcdefghijklmnopqrstuvwxyz0123456789-"[byte(rng) % 37]);
      labels.push_back(std::move(label));
    }
    return DnsName::from_labels(std::move(labels));
  };
  auto random_rr = [&] {
    ResourceRecord rr;
    rr.name = random_name();
    rr.rtype = static_cast<std::uint16_t>(byte(rng));
    rr.rclass = kClassIn;
    rr.ttl = static_cast<std::uint32_t>(rng() & 0xffffff);
    rr.rdata.resize(static_cast<std::size_t>(byte(rng) % 32));
    for (auto& b : rr.rdata) b = static_cast<std::uint8_t>(byte(rng));
    return rr;
  };

  DnsMessage msg;
  msg.id = static_cast<std::uint16_t>(rng());
  msg.flags.set_qr(rng() & 1);
  msg.flags.set_rd(rng() & 1);
  msg.flags.set_ra(rng() & 1);
  msg.flags.set_rcode(static_cast<std::uint8_t>(rng() & 0xf));
  msg.questions.push_back(Question{random_name(), kTypeA, kClassIn});
  for (int i = rr_count(rng); i > 0; --i) msg.answers.push_back(random_rr());
  for (int i = rr_count(rng); i > 0; --i) msg.authorities.push_back(random_rr());
  for (int i = rr_count(rng); i > 0; --i) msg.additionals.push_back(random_rr());
  return msg;
}

TEST(RoundTrip, RandomMessages) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 500; ++i) {
    DnsMessage msg = random_message(rng);
    EXPECT_EQ(decode_message(encode_message(msg)), msg);
  }
}

TEST(EdnsOption, SetAndReadBack) {
  DnsMessage msg = make_query(1, DnsName::from_presentation("x.test"), kTypeA);
  msg = with_edns_option(std::move(msg), EdnsOption{65001, Bytes{1, 2, 3}});
  auto opt = find_edns_option(msg, 65001);
  ASSERT_TRUE(opt.has_value());
  EXPECT_EQ(opt->payload, (Bytes{1, 2, 3}));
}

TEST(EdnsOption, SameCodeReplacesPayload) {
  DnsMessage msg = make_query(1, DnsName::from_presentation("x.test"), kTypeA);
  msg = with_edns_option(std::move(msg), EdnsOption{65001, Bytes{1}});
  msg = with_edns_option(std::move(msg), EdnsOption{65001, Bytes{2, 2}});
  auto opt = find_edns_option(msg, 65001);
  ASSERT_TRUE(opt.has_value());
  EXPECT_EQ(opt->payload, (Bytes{2, 2}));

  int opt_records = 0;
  for (const auto& rr : msg.additionals) opt_records += rr.rtype == kTypeOpt;
  EXPECT_EQ(opt_records, 1);
}

TEST(EdnsOption, AtMostOneOptAfterManySets) {
  DnsMessage msg = make_query(1, DnsName::from_presentation("x.test"), kTypeA);
  for (std::uint16_t code = 100; code < 120; ++code) {
    msg = with_edns_option(std::move(msg), EdnsOption{code, Bytes{static_cast<std::uint8_t>(code)}});
  }
  int opt_records = 0;
  for (const auto& rr : msg.additionals) opt_records += rr.rtype == kTypeOpt;
  EXPECT_EQ(opt_records, 1);
  // Every option must still be readable.
  for (std::uint16_t code = 100; code < 120; ++code) {
    ASSERT_TRUE(find_edns_option(msg, code).has_value());
  }
}

TEST(EdnsOption, ClientSubnetOptOutLayout) {
  // family 0, source prefix 0, scope 0 per the client-subnet wire format.
  EdnsOption ecs = make_ecs_opt_out();
  EXPECT_EQ(ecs.code, kOptionClientSubnet);
  EXPECT_EQ(ecs.payload, (Bytes{0, 0, 0, 0}));
  EXPECT_TRUE(is_ecs_opt_out(ecs));

  DnsMessage msg = make_query(1, DnsName::from_presentation("x.test"), kTypeA);
  msg = with_edns_option(std::move(msg), ecs);
  DnsMessage reparsed = decode_message(encode_message(msg));
  auto opt = find_edns_option(reparsed, kOptionClientSubnet);
  ASSERT_TRUE(opt.has_value());
  EXPECT_EQ((opt->payload[0] << 8) | opt->payload[1], 0);  // family
  EXPECT_EQ(opt->payload[2], 0);                           // source prefix length
}

TEST(EdnsOption, RemoveKeepsOthers) {
  DnsMessage msg = make_query(1, DnsName::from_presentation("x.test"), kTypeA);
  msg = with_edns_option(std::move(msg), make_ecs_opt_out());
  msg = with_edns_option(std::move(msg), EdnsOption{65001, Bytes{9}});
  msg = without_edns_option(std::move(msg), kOptionClientSubnet);
  EXPECT_FALSE(find_edns_option(msg, kOptionClientSubnet).has_value());
  EXPECT_TRUE(find_edns_option(msg, 65001).has_value());
}

TEST(EncodeRecord, OpaqueUnknownType) {
  ResourceRecord rr;
  rr.name = DnsName::from_presentation("x.test");
  rr.rtype = 0x99;
  rr.rdata = Bytes{1, 2, 3, 4, 5};
  Bytes out;
  encode_record(rr, out);
  std::size_t offset = 0;
  EXPECT_EQ(decode_record(out, offset), rr);
  EXPECT_EQ(offset, out.size());
}

}  // namespace
}  // namespace odns::wire
