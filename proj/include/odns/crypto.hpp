// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// Hybrid encryption for oblivious queries: a fresh 16-byte session key
// seals the requested domain (AES-128-GCM), the session key travels
// wrapped under the resolver's Curve25519 public key (ephemeral ECDH +
// HKDF-SHA256 + AES-128-GCM), and both ride inside a valid query name.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odns/rng.hpp"
#include "odns/wire.hpp"

namespace odns::crypto {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kSessionKeySize = 16;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kCurvePointSize = 32;

// Per-query symmetric key (never reused across queries).
struct SessionKey {
  std::array<std::uint8_t, kSessionKeySize> bytes{};

  bool operator==(const SessionKey&) const = default;
};

// Long-lived resolver keypair. The public half is distributed through the
// special bootstrap query; the name label is derived from it.
struct ResolverKeyPair {
  std::array<std::uint8_t, kCurvePointSize> public_key{};
  std::array<std::uint8_t, kCurvePointSize> secret_key{};

  static ResolverKeyPair generate(Rng& rng);
  // Recomputes the public half; throws InvalidPublicKey if the stored
  // public key does not match the secret.
  static ResolverKeyPair from_secret(std::span<const std::uint8_t> secret);
};

// Session key wrapped for the resolver: ephemeral point, nonce, then the
// encrypted key plus auth tag. Serialized form is exactly 76 bytes.
struct WrappedKey {
  std::array<std::uint8_t, kCurvePointSize> ephemeral_public{};
  std::array<std::uint8_t, kNonceSize> nonce{};
  std::array<std::uint8_t, kSessionKeySize + kTagSize> ciphertext{};

  static constexpr std::size_t kWireSize = kCurvePointSize + kNonceSize + kSessionKeySize + kTagSize;

  Bytes serialize() const;
  static WrappedKey deserialize(std::span<const std::uint8_t> data);

  bool operator==(const WrappedKey&) const = default;
};

// Domain sealed under the session key: 12-byte nonce then ciphertext of
// plaintext length + 16 tag bytes.
struct SealedDomain {
  std::array<std::uint8_t, kNonceSize> nonce{};
  Bytes ciphertext;

  Bytes serialize() const;
  static SealedDomain deserialize(std::span<const std::uint8_t> data);

  bool operator==(const SealedDomain&) const = default;
};

// Answer record set sealed under the session key, carried in the response
// OPT record so intermediate resolvers cannot cache or read it. The true
// TTLs travel inside; outer records are stamped TTL 0.
struct SealedAnswer {
  std::array<std::uint8_t, kNonceSize> nonce{};
  Bytes ciphertext;

  Bytes serialize() const;
  static SealedAnswer deserialize(std::span<const std::uint8_t> data);

  bool operator==(const SealedAnswer&) const = default;
};

// Plaintext of a sealed answer: the response code plus the answer records
// with their true TTLs.
struct AnswerSet {
  std::uint8_t rcode = wire::kRcodeNoError;
  std::vector<wire::ResourceRecord> records;

  bool operator==(const AnswerSet&) const = default;
};

SessionKey generate_session_key(Rng& rng);

// `domain` is the lowercase presentation form, non-empty, <= 252 chars.
SealedDomain seal_domain(std::string_view domain, const SessionKey& key, Rng& rng);

// Throws AuthFailure on key mismatch or tampering.
std::string open_domain(const SealedDomain& sealed, const SessionKey& key);

WrappedKey wrap_key(const SessionKey& key, std::span<const std::uint8_t> resolver_public, Rng& rng);

SessionKey unwrap_key(const WrappedKey& wrapped, std::span<const std::uint8_t> resolver_secret);

// Sealed payloads larger than this cannot ride in a response option.
inline constexpr std::size_t kMaxSealedAnswerSize = 4000;

SealedAnswer seal_answer(const AnswerSet& answers, const SessionKey& key, Rng& rng);
AnswerSet open_answer(const SealedAnswer& sealed, const SessionKey& key);

// Lowercase base32 of the first 20 bytes of SHA-256 of the public key:
// a 32-character label whose authenticity is checkable from the key alone.
std::string derive_self_certifying_name(std::span<const std::uint8_t> public_key);

inline constexpr std::size_t kSelfCertifyingLabelLength = 32;
// base64url of the 76-byte wrapped key: 102 chars, split 63 + 39.
inline constexpr std::size_t kKeyLabel1Length = 63;
inline constexpr std::size_t kKeyLabel2Length = 39;

// A query name carrying the sealed domain and wrapped key:
//   [ciphertext labels...][key label 1][key label 2][resolver label?][suffix]
struct OdnsQname {
  std::vector<std::string> ciphertext_labels;
  std::array<std::string, 2> key_labels;
  std::optional<std::string> resolver_label;
  wire::DnsName suffix;

  wire::DnsName to_name() const;
};

// Seals `domain` under a caller-provided session key, wraps that key for
// `resolver_public`, and lays the result out as labels. Throws
// QnameOversize when the presentation form would exceed 252 characters;
// the caller falls back or answers FORMERR.
OdnsQname build_odns_qname(std::string_view domain, const SessionKey& key,
                           std::span<const std::uint8_t> resolver_public,
                           const std::optional<std::string>& resolver_label,
                           const wire::DnsName& suffix, Rng& rng);

struct ParsedOdnsQname {
  SealedDomain sealed_domain;
  WrappedKey wrapped_key;
  std::optional<std::string> resolver_label;
};

// Inverse of build_odns_qname. Throws NotOdnsQuery when `name` does not end
// with `suffix`, MalformedOdnsQname when the label structure or encoding is
// broken. The 32-char resolver label is recognized by length (the trailing
// key label is always 39 chars).
ParsedOdnsQname parse_odns_qname(const wire::DnsName& name, const wire::DnsName& suffix);

// Exact presentation-form length build_odns_qname would produce for a
// domain of `domain_chars` characters under a suffix of `suffix_chars`
// presentation characters, closed form.
std::size_t estimate_qname_length(std::size_t domain_chars, std::size_t suffix_chars,
                                  bool with_resolver_label = false);

// --- primitives (exposed for reuse and for test vectors) ---

// AES-128-GCM, no associated data; seal returns ciphertext||tag.
Bytes aes128gcm_seal(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                     std::span<const std::uint8_t> plaintext);
Bytes aes128gcm_open(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                     std::span<const std::uint8_t> ciphertext_and_tag);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

// HKDF-SHA256 with empty salt.
Bytes hkdf_sha256(std::span<const std::uint8_t> ikm, std::string_view info, std::size_t length);

// X25519 scalar multiplication helpers.
std::array<std::uint8_t, 32> x25519_public_from_secret(std::span<const std::uint8_t> secret);
std::array<std::uint8_t, 32> x25519_shared(std::span<const std::uint8_t> secret,
                                           std::span<const std::uint8_t> peer_public);

}  // namespace odns::crypto
