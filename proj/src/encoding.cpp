// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/encoding.hpp"

#include <array>

#include "odns/errors.hpp"

namespace odns::encoding {

namespace {

constexpr char kBase64Url[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
constexpr char kBase32Lower[] = "abcdefghijklmnopqrstuvwxyz234567";

constexpr std::array<std::int8_t, 256> make_base64url_rev() {
  std::array<std::int8_t, 256> rev{};
  for (auto& v : rev) v = -1;
  for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kBase64Url[i])] = static_cast<std::int8_t>(i);
  return rev;
}

constexpr auto kBase64UrlRev = make_base64url_rev();

}  // namespace

std::string base64url_encode(std::span<const std::uint8_t> data) {
  std::string out;
  out.reserve(base64url_encoded_length(data.size()));
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(kBase64Url[(v >> 18) & 63]);
    out.push_back(kBase64Url[(v >> 12) & 63]);
    out.push_back(kBase64Url[(v >> 6) & 63]);
    out.push_back(kBase64Url[v & 63]);
  }
  if (data.size() - i == 1) {
    std::uint32_t v = data[i] << 16;
    out.push_back(kBase64Url[(v >> 18) & 63]);
    out.push_back(kBase64Url[(v >> 12) & 63]);
  } else if (data.size() - i == 2) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(kBase64Url[(v >> 18) & 63]);
    out.push_back(kBase64Url[(v >> 12) & 63]);
    out.push_back(kBase64Url[(v >> 6) & 63]);
  }
  return out;
}

std::vector<std::uint8_t> base64url_decode(std::string_view text) {
  if (text.size() % 4 == 1) {
    throw MalformedOdnsQname("base64url length " + std::to_string(text.size()));
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() * 3 / 4);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    std::int8_t v = kBase64UrlRev[static_cast<unsigned char>(c)];
    if (v < 0) throw MalformedOdnsQname(std::string("base64url character '") + c + "'");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  // Leftover bits must be zero padding from the final partial group.
  if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) {
    throw MalformedOdnsQname("base64url trailing bits");
  }
  return out;
}

std::string base32_encode_lower(std::span<const std::uint8_t> data) {
  std::string out;
  out.reserve((data.size() * 8 + 4) / 5);
  std::uint32_t acc = 0;
  int bits = 0;
  for (std::uint8_t b : data) {
    acc = (acc << 8) | b;
    bits += 8;
    while (bits >= 5) {
      bits -= 5;
      out.push_back(kBase32Lower[(acc >> bits) & 31]);
    }
  }
  if (bits > 0) {
    out.push_back(kBase32Lower[(acc << (5 - bits)) & 31]);
  }
  return out;
}

std::string hex_encode(std::span<const std::uint8_t> data) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

}  // namespace odns::encoding
