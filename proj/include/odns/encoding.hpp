// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odns::encoding {

// base64url alphabet (A-Z a-z 0-9 - _), unpadded. Standard base64 uses
// '+', '/' and '=' which are not safe inside DNS labels.
std::string base64url_encode(std::span<const std::uint8_t> data);

// Throws MalformedOdnsQname on characters outside the alphabet or on an
// impossible length (len % 4 == 1).
std::vector<std::uint8_t> base64url_decode(std::string_view text);

// Encoded length of n input bytes, unpadded.
constexpr std::size_t base64url_encoded_length(std::size_t n) {
  return 4 * (n / 3) + (n % 3 == 0 ? 0 : n % 3 + 1);
}

// Lowercase base32 (a-z 2-7), unpadded. Used for self-certifying names,
// where the label must survive case-insensitive DNS handling.
std::string base32_encode_lower(std::span<const std::uint8_t> data);

std::string hex_encode(std::span<const std::uint8_t> data);

}  // namespace odns::encoding
