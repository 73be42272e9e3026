// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <cstring>
#include <memory>

#include "odns/encoding.hpp"
#include "odns/errors.hpp"

namespace odns {

void SystemRng::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw RngFailure("RAND_bytes");
  }
}

Rng& system_rng() {
  static SystemRng rng;
  return rng;
}

}  // namespace odns

namespace odns::crypto {

namespace {

constexpr char kWrapInfo[] = "odns-key-wrap-v1";

struct EvpPkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct EvpPkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct EvpCipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};

using PkeyPtr = std::unique_ptr<EVP_PKEY, EvpPkeyDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, EvpPkeyCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, EvpCipherCtxDeleter>;

PkeyPtr x25519_private(std::span<const std::uint8_t> secret) {
  if (secret.size() != kCurvePointSize) throw InvalidPublicKey("secret key must be 32 bytes");
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, secret.data(), secret.size()));
  if (!key) throw InvalidPublicKey("unusable X25519 secret");
  return key;
}

PkeyPtr x25519_peer(std::span<const std::uint8_t> pub) {
  if (pub.size() != kCurvePointSize) throw InvalidPublicKey("public key must be 32 bytes");
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, pub.data(), pub.size()));
  if (!key) throw InvalidPublicKey("unusable X25519 point");
  return key;
}

std::array<std::uint8_t, kSessionKeySize> derive_wrap_key(std::span<const std::uint8_t> shared) {
  Bytes okm = hkdf_sha256(shared, kWrapInfo, kSessionKeySize);
  std::array<std::uint8_t, kSessionKeySize> out{};
  std::memcpy(out.data(), okm.data(), kSessionKeySize);
  return out;
}

void append(Bytes& out, std::span<const std::uint8_t> part) {
  out.insert(out.end(), part.begin(), part.end());
}

}  // namespace

Bytes aes128gcm_seal(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                     std::span<const std::uint8_t> plaintext) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce.data()) != 1) {
    throw Error("aes-gcm init");
  }
  Bytes out(plaintext.size() + kTagSize);
  int len = 0;
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(), static_cast<int>(plaintext.size())) != 1) {
    throw Error("aes-gcm encrypt");
  }
  int fin = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) throw Error("aes-gcm final");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize, out.data() + plaintext.size()) != 1) {
    throw Error("aes-gcm tag");
  }
  return out;
}

Bytes aes128gcm_open(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                     std::span<const std::uint8_t> ciphertext_and_tag) {
  if (ciphertext_and_tag.size() < kTagSize) throw AuthFailure("ciphertext shorter than tag");
  std::size_t ct_len = ciphertext_and_tag.size() - kTagSize;
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce.data()) != 1) {
    throw Error("aes-gcm init");
  }
  Bytes out(ct_len);
  int len = 0;
  if (ct_len > 0 &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext_and_tag.data(), static_cast<int>(ct_len)) != 1) {
    throw AuthFailure("aes-gcm decrypt");
  }
  std::uint8_t tag[kTagSize];
  std::memcpy(tag, ciphertext_and_tag.data() + ct_len, kTagSize);
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag) != 1) throw Error("aes-gcm tag");
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    throw AuthFailure("tag mismatch");
  }
  return out;
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Bytes hkdf_sha256(std::span<const std::uint8_t> ikm, std::string_view info, std::size_t length) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), reinterpret_cast<const std::uint8_t*>(info.data()),
                                  static_cast<int>(info.size())) != 1) {
    throw Error("hkdf init");
  }
  Bytes out(length);
  std::size_t out_len = length;
  if (EVP_PKEY_derive(ctx.get(), out.data(), &out_len) != 1 || out_len != length) throw Error("hkdf derive");
  return out;
}

std::array<std::uint8_t, 32> x25519_public_from_secret(std::span<const std::uint8_t> secret) {
  PkeyPtr key = x25519_private(secret);
  std::array<std::uint8_t, 32> out{};
  std::size_t len = out.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), out.data(), &len) != 1 || len != out.size()) {
    throw InvalidPublicKey("raw public extraction");
  }
  return out;
}

std::array<std::uint8_t, 32> x25519_shared(std::span<const std::uint8_t> secret,
                                           std::span<const std::uint8_t> peer_public) {
  PkeyPtr own = x25519_private(secret);
  PkeyPtr peer = x25519_peer(peer_public);
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(own.get(), nullptr));
  std::array<std::uint8_t, 32> out{};
  std::size_t len = out.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    // OpenSSL rejects low-order points that would yield an all-zero secret.
    throw InvalidPublicKey("X25519 derive");
  }
  return out;
}

ResolverKeyPair ResolverKeyPair::generate(Rng& rng) {
  ResolverKeyPair kp;
  rng.fill(kp.secret_key);
  kp.public_key = x25519_public_from_secret(kp.secret_key);
  return kp;
}

ResolverKeyPair ResolverKeyPair::from_secret(std::span<const std::uint8_t> secret) {
  if (secret.size() != kCurvePointSize) throw InvalidPublicKey("secret key must be 32 bytes");
  ResolverKeyPair kp;
  std::memcpy(kp.secret_key.data(), secret.data(), kCurvePointSize);
  kp.public_key = x25519_public_from_secret(kp.secret_key);
  return kp;
}

SessionKey generate_session_key(Rng& rng) {
  SessionKey key;
  rng.fill(key.bytes);
  return key;
}

SealedDomain seal_domain(std::string_view domain, const SessionKey& key, Rng& rng) {
  SealedDomain sealed;
  rng.fill(sealed.nonce);
  std::span<const std::uint8_t> plain(reinterpret_cast<const std::uint8_t*>(domain.data()), domain.size());
  sealed.ciphertext = aes128gcm_seal(key.bytes, sealed.nonce, plain);
  return sealed;
}

std::string open_domain(const SealedDomain& sealed, const SessionKey& key) {
  Bytes plain = aes128gcm_open(key.bytes, sealed.nonce, sealed.ciphertext);
  return std::string(plain.begin(), plain.end());
}

WrappedKey wrap_key(const SessionKey& key, std::span<const std::uint8_t> resolver_public, Rng& rng) {
  WrappedKey wrapped;
  std::array<std::uint8_t, kCurvePointSize> ephemeral_secret{};
  rng.fill(ephemeral_secret);
  wrapped.ephemeral_public = x25519_public_from_secret(ephemeral_secret);
  auto shared = x25519_shared(ephemeral_secret, resolver_public);
  auto wrap = derive_wrap_key(shared);
  rng.fill(wrapped.nonce);
  Bytes ct = aes128gcm_seal(wrap, wrapped.nonce, key.bytes);
  std::memcpy(wrapped.ciphertext.data(), ct.data(), wrapped.ciphertext.size());
  return wrapped;
}

SessionKey unwrap_key(const WrappedKey& wrapped, std::span<const std::uint8_t> resolver_secret) {
  auto shared = x25519_shared(resolver_secret, wrapped.ephemeral_public);
  auto wrap = derive_wrap_key(shared);
  Bytes plain = aes128gcm_open(wrap, wrapped.nonce, wrapped.ciphertext);
  SessionKey key;
  std::memcpy(key.bytes.data(), plain.data(), kSessionKeySize);
  return key;
}

Bytes WrappedKey::serialize() const {
  Bytes out;
  out.reserve(kWireSize);
  append(out, ephemeral_public);
  append(out, nonce);
  append(out, ciphertext);
  return out;
}

WrappedKey WrappedKey::deserialize(std::span<const std::uint8_t> data) {
  if (data.size() != kWireSize) {
    throw MalformedOdnsQname("wrapped key of " + std::to_string(data.size()) + " bytes");
  }
  WrappedKey out;
  std::memcpy(out.ephemeral_public.data(), data.data(), kCurvePointSize);
  std::memcpy(out.nonce.data(), data.data() + kCurvePointSize, kNonceSize);
  std::memcpy(out.ciphertext.data(), data.data() + kCurvePointSize + kNonceSize, out.ciphertext.size());
  return out;
}

Bytes SealedDomain::serialize() const {
  Bytes out;
  out.reserve(kNonceSize + ciphertext.size());
  append(out, nonce);
  append(out, ciphertext);
  return out;
}

SealedDomain SealedDomain::deserialize(std::span<const std::uint8_t> data) {
  if (data.size() < kNonceSize + kTagSize + 1) {
    throw MalformedOdnsQname("sealed domain of " + std::to_string(data.size()) + " bytes");
  }
  SealedDomain out;
  std::memcpy(out.nonce.data(), data.data(), kNonceSize);
  out.ciphertext.assign(data.begin() + kNonceSize, data.end());
  return out;
}

Bytes SealedAnswer::serialize() const {
  Bytes out;
  out.reserve(kNonceSize + ciphertext.size());
  append(out, nonce);
  append(out, ciphertext);
  return out;
}

SealedAnswer SealedAnswer::deserialize(std::span<const std::uint8_t> data) {
  if (data.size() < kNonceSize + kTagSize) {
    throw MalformedMessage("sealed answer of " + std::to_string(data.size()) + " bytes");
  }
  SealedAnswer out;
  std::memcpy(out.nonce.data(), data.data(), kNonceSize);
  out.ciphertext.assign(data.begin() + kNonceSize, data.end());
  return out;
}

SealedAnswer seal_answer(const AnswerSet& answers, const SessionKey& key, Rng& rng) {
  Bytes plain;
  plain.push_back(answers.rcode);
  plain.push_back(static_cast<std::uint8_t>(answers.records.size() >> 8));
  plain.push_back(static_cast<std::uint8_t>(answers.records.size() & 0xff));
  for (const auto& rr : answers.records) wire::encode_record(rr, plain);
  if (plain.size() + kNonceSize + kTagSize > kMaxSealedAnswerSize) {
    throw PayloadOversize("sealed answer of " + std::to_string(plain.size()) + " bytes");
  }
  SealedAnswer sealed;
  rng.fill(sealed.nonce);
  sealed.ciphertext = aes128gcm_seal(key.bytes, sealed.nonce, plain);
  return sealed;
}

AnswerSet open_answer(const SealedAnswer& sealed, const SessionKey& key) {
  Bytes plain = aes128gcm_open(key.bytes, sealed.nonce, sealed.ciphertext);
  if (plain.size() < 3) throw MalformedMessage("sealed answer payload too short");
  AnswerSet out;
  out.rcode = plain[0];
  std::size_t count = (static_cast<std::size_t>(plain[1]) << 8) | plain[2];
  std::size_t offset = 3;
  for (std::size_t i = 0; i < count; ++i) {
    out.records.push_back(wire::decode_record(plain, offset));
  }
  if (offset != plain.size()) throw MalformedMessage("sealed answer trailing bytes");
  return out;
}

std::string derive_self_certifying_name(std::span<const std::uint8_t> public_key) {
  auto digest = sha256(public_key);
  return encoding::base32_encode_lower(std::span(digest).first(20));
}

wire::DnsName OdnsQname::to_name() const {
  std::vector<std::string> labels = ciphertext_labels;
  labels.push_back(key_labels[0]);
  labels.push_back(key_labels[1]);
  if (resolver_label) labels.push_back(*resolver_label);
  for (const auto& l : suffix.labels()) labels.push_back(l);
  return wire::DnsName::from_labels(std::move(labels));
}

OdnsQname build_odns_qname(std::string_view domain, const SessionKey& key,
                           std::span<const std::uint8_t> resolver_public,
                           const std::optional<std::string>& resolver_label,
                           const wire::DnsName& suffix, Rng& rng) {
  if (domain.empty()) throw MalformedOdnsQname("empty domain");
  std::size_t predicted =
      estimate_qname_length(domain.size(), suffix.presentation_length(), resolver_label.has_value());
  if (predicted > wire::kMaxNamePresentationLength) {
    throw QnameOversize(std::to_string(predicted) + " chars for " + std::string(domain.substr(0, 32)));
  }

  OdnsQname out;
  out.suffix = suffix;
  out.resolver_label = resolver_label;

  SealedDomain sealed = seal_domain(domain, key, rng);
  std::string cipher_text = encoding::base64url_encode(sealed.serialize());
  for (std::size_t i = 0; i < cipher_text.size(); i += wire::kMaxLabelLength) {
    out.ciphertext_labels.push_back(cipher_text.substr(i, wire::kMaxLabelLength));
  }

  WrappedKey wrapped = wrap_key(key, resolver_public, rng);
  std::string key_text = encoding::base64url_encode(wrapped.serialize());
  out.key_labels[0] = key_text.substr(0, kKeyLabel1Length);
  out.key_labels[1] = key_text.substr(kKeyLabel1Length);
  return out;
}

ParsedOdnsQname parse_odns_qname(const wire::DnsName& name, const wire::DnsName& suffix) {
  if (!name.ends_with(suffix)) throw NotOdnsQuery(name.presentation().substr(0, 64));
  wire::DnsName head = name.without_suffix(suffix);
  std::vector<std::string> labels = head.labels();

  ParsedOdnsQname out;
  if (!labels.empty() && labels.back().size() == kSelfCertifyingLabelLength) {
    out.resolver_label = labels.back();
    labels.pop_back();
  }
  if (labels.size() < 3) throw MalformedOdnsQname("too few labels");

  std::string key_text = labels[labels.size() - 2] + labels[labels.size() - 1];
  if (labels[labels.size() - 2].size() != kKeyLabel1Length ||
      labels[labels.size() - 1].size() != kKeyLabel2Length) {
    throw MalformedOdnsQname("key labels of " + std::to_string(labels[labels.size() - 2].size()) + "+" +
                             std::to_string(labels[labels.size() - 1].size()) + " chars");
  }
  labels.resize(labels.size() - 2);
  out.wrapped_key = WrappedKey::deserialize(encoding::base64url_decode(key_text));

  std::string cipher_text;
  for (const auto& l : labels) cipher_text += l;
  out.sealed_domain = SealedDomain::deserialize(encoding::base64url_decode(cipher_text));
  return out;
}

std::size_t estimate_qname_length(std::size_t domain_chars, std::size_t suffix_chars,
                                  bool with_resolver_label) {
  std::size_t sealed = domain_chars + kNonceSize + kTagSize;
  std::size_t cipher_chars = encoding::base64url_encoded_length(sealed);
  std::size_t cipher_labels = (cipher_chars + wire::kMaxLabelLength - 1) / wire::kMaxLabelLength;
  // cipher labels joined by dots, two key labels, optional resolver label,
  // then the suffix; one dot precedes every component after the first.
  std::size_t total = cipher_chars + (cipher_labels - 1);
  total += 1 + kKeyLabel1Length + 1 + kKeyLabel2Length;
  if (with_resolver_label) total += 1 + kSelfCertifyingLabelLength;
  total += 1 + suffix_chars;
  return total;
}

}  // namespace odns::crypto
