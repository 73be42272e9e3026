// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// Minimal DNS wire codec: headers, questions, resource records and EDNS0
// OPT pseudo-records with custom options. Covers exactly the subset the
// ODNS services exchange; unknown record types are carried opaquely.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odns::wire {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxLabelLength = 63;
inline constexpr std::size_t kMaxNameWireLength = 255;
// Working presentation-form limit for query names; longer names cannot be
// carried and the caller must fall back or answer FORMERR.
inline constexpr std::size_t kMaxNamePresentationLength = 252;

// Record types and classes used by the services. Unknown values pass through.
inline constexpr std::uint16_t kTypeA = 1;
inline constexpr std::uint16_t kTypeCname = 5;
inline constexpr std::uint16_t kTypeTxt = 16;
inline constexpr std::uint16_t kTypeAaaa = 28;
inline constexpr std::uint16_t kTypeOpt = 41;
inline constexpr std::uint16_t kClassIn = 1;

inline constexpr std::uint8_t kRcodeNoError = 0;
inline constexpr std::uint8_t kRcodeFormErr = 1;
inline constexpr std::uint8_t kRcodeServFail = 2;
inline constexpr std::uint8_t kRcodeNxDomain = 3;
inline constexpr std::uint8_t kRcodeRefused = 5;

// EDNS option codes. 8 is the client-subnet option; the two 650xx codes are
// from the experimental/local-use range.
inline constexpr std::uint16_t kOptionClientSubnet = 8;
inline constexpr std::uint16_t kOptionResolverIdentity = 65001;
inline constexpr std::uint16_t kOptionSealedAnswer = 65002;

inline constexpr std::uint16_t kEdnsUdpPayloadSize = 4096;

// A domain name as an ordered list of labels. Labels are raw byte strings
// of 1..63 bytes; the total presentation form (labels joined by '.') is
// capped at 252 characters.
class DnsName {
public:
  DnsName() = default;  // the root name

  // Throws OversizeName on label or total-length violations.
  static DnsName from_presentation(std::string_view text);
  static DnsName from_labels(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  bool is_root() const { return labels_.empty(); }
  std::size_t label_count() const { return labels_.size(); }

  // Labels joined by '.'; empty string for the root.
  std::string presentation() const;
  std::size_t presentation_length() const;
  // Encoded size: one length byte per label plus the terminal zero byte.
  std::size_t wire_length() const;

  bool ends_with(const DnsName& suffix) const;
  // Labels in front of `suffix`; requires ends_with(suffix).
  DnsName without_suffix(const DnsName& suffix) const;
  DnsName appended(const DnsName& suffix) const;
  DnsName lowered() const;

  bool operator==(const DnsName&) const = default;

private:
  static void check_label(std::string_view label);
  void check_total() const;

  std::vector<std::string> labels_;
};

// The 16-bit header flags word, kept verbatim so that decode(encode(m))
// round-trips bit-exactly. Accessors cover the fields the services use.
struct HeaderFlags {
  std::uint16_t bits = 0;

  bool qr() const { return bits & 0x8000; }
  std::uint8_t opcode() const { return (bits >> 11) & 0xf; }
  bool aa() const { return bits & 0x0400; }
  bool tc() const { return bits & 0x0200; }
  bool rd() const { return bits & 0x0100; }
  bool ra() const { return bits & 0x0080; }
  std::uint8_t rcode() const { return bits & 0xf; }

  void set_qr(bool v) { set_bit(0x8000, v); }
  void set_aa(bool v) { set_bit(0x0400, v); }
  void set_tc(bool v) { set_bit(0x0200, v); }
  void set_rd(bool v) { set_bit(0x0100, v); }
  void set_ra(bool v) { set_bit(0x0080, v); }
  void set_opcode(std::uint8_t v) { bits = static_cast<std::uint16_t>((bits & ~0x7800) | ((v & 0xf) << 11)); }
  void set_rcode(std::uint8_t v) { bits = static_cast<std::uint16_t>((bits & ~0xf) | (v & 0xf)); }

  bool operator==(const HeaderFlags&) const = default;

private:
  void set_bit(std::uint16_t mask, bool v) {
    bits = v ? static_cast<std::uint16_t>(bits | mask) : static_cast<std::uint16_t>(bits & ~mask);
  }
};

struct Question {
  DnsName name;
  std::uint16_t qtype = kTypeA;
  std::uint16_t qclass = kClassIn;

  bool operator==(const Question&) const = default;
};

struct ResourceRecord {
  DnsName name;
  std::uint16_t rtype = kTypeA;
  std::uint16_t rclass = kClassIn;
  std::uint32_t ttl = 0;
  Bytes rdata;

  bool operator==(const ResourceRecord&) const = default;
};

struct EdnsOption {
  std::uint16_t code = 0;
  Bytes payload;

  bool operator==(const EdnsOption&) const = default;
};

struct DnsMessage {
  std::uint16_t id = 0;
  HeaderFlags flags;
  std::vector<Question> questions;
  std::vector<ResourceRecord> answers;
  std::vector<ResourceRecord> authorities;
  std::vector<ResourceRecord> additionals;

  bool operator==(const DnsMessage&) const = default;
};

// Emits standards-compliant wire bytes; never uses compression pointers.
// Throws OversizeName if any name violates the label/length limits.
Bytes encode_message(const DnsMessage& msg);

// Parses header, question, answer, authority and additional sections.
// Compression pointers are followed on input (backward references only).
// Throws MalformedMessage on truncation, bad pointers or label overruns.
DnsMessage decode_message(std::span<const std::uint8_t> data);

// Places `opt` in the message's OPT record, creating the OPT record if
// absent; an existing option with the same code is replaced. The result
// carries at most one OPT record.
DnsMessage with_edns_option(DnsMessage msg, EdnsOption opt);

std::optional<EdnsOption> find_edns_option(const DnsMessage& msg, std::uint16_t code);

// Drops the option with the given code, leaving any others in place.
DnsMessage without_edns_option(DnsMessage msg, std::uint16_t code);

// Uncompressed single-record encode/decode, used for sealed answer payloads.
void encode_record(const ResourceRecord& rr, Bytes& out);
ResourceRecord decode_record(std::span<const std::uint8_t> data, std::size_t& offset);

// EDNS0 client-subnet payload with family 0, source prefix length 0: the
// opt-out form a stub attaches so the recursive does not add its own.
EdnsOption make_ecs_opt_out();

// True when the payload parses as client-subnet with source prefix 0.
bool is_ecs_opt_out(const EdnsOption& opt);

// Convenience builders.
DnsMessage make_query(std::uint16_t id, const DnsName& name, std::uint16_t qtype);
DnsMessage make_response(const DnsMessage& query, std::uint8_t rcode);

}  // namespace odns::wire
