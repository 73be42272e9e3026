// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/encoding.hpp"

#include <gtest/gtest.h>

#include <random>

#include "odns/errors.hpp"

namespace odns::encoding {
namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

// RFC 4648 test vectors, unpadded.
TEST(Base64Url, Rfc4648Vectors) {
  EXPECT_EQ(base64url_encode(bytes_of("")), "");
  EXPECT_EQ(base64url_encode(bytes_of("f")), "Zg");
  EXPECT_EQ(base64url_encode(bytes_of("fo")), "Zm8");
  EXPECT_EQ(base64url_encode(bytes_of("foo")), "Zm9v");
  EXPECT_EQ(base64url_encode(bytes_of("foob")), "Zm9vYg");
  EXPECT_EQ(base64url_encode(bytes_of("fooba")), "Zm9vYmE");
  EXPECT_EQ(base64url_encode(bytes_of("foobar")), "Zm9vYmFy");
}

TEST(Base64Url, UrlSafeAlphabet) {
  // 0xfb 0xef 0xff encodes to -+// in standard base64; here it must use - and _.
  std::vector<std::uint8_t> data{0xfb, 0xef, 0xff};
  std::string text = base64url_encode(data);
  EXPECT_EQ(text.find('+'), std::string::npos);
  EXPECT_EQ(text.find('/'), std::string::npos);
  EXPECT_EQ(text.find('='), std::string::npos);
  EXPECT_EQ(base64url_decode(text), data);
}

TEST(Base64Url, RoundTripRandomLengths) {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 300; ++n) {
    std::vector<std::uint8_t> data(static_cast<std::size_t>(n));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    std::string text = base64url_encode(data);
    EXPECT_EQ(text.size(), base64url_encoded_length(data.size()));
    EXPECT_EQ(base64url_decode(text), data);
  }
}

TEST(Base64Url, RejectsBadInput) {
  EXPECT_THROW(base64url_decode("a"), MalformedOdnsQname);       // len % 4 == 1
  EXPECT_THROW(base64url_decode("ab=d"), MalformedOdnsQname);    // padding char
  EXPECT_THROW(base64url_decode("ab+d"), MalformedOdnsQname);    // standard alphabet
  EXPECT_THROW(base64url_decode("ab.d"), MalformedOdnsQname);
}

TEST(Base32Lower, Rfc4648Vectors) {
  EXPECT_EQ(base32_encode_lower(bytes_of("")), "");
  EXPECT_EQ(base32_encode_lower(bytes_of("f")), "my");
  EXPECT_EQ(base32_encode_lower(bytes_of("fo")), "mzxq");
  EXPECT_EQ(base32_encode_lower(bytes_of("foo")), "mzxw6");
  EXPECT_EQ(base32_encode_lower(bytes_of("foob")), "mzxw6yq");
  EXPECT_EQ(base32_encode_lower(bytes_of("fooba")), "mzxw6ytb");
  EXPECT_EQ(base32_encode_lower(bytes_of("foobar")), "mzxw6ytboi");
}

TEST(Base32Lower, TwentyBytesGiveThirtyTwoChars) {
  std::vector<std::uint8_t> data(20, 0xa5);
  EXPECT_EQ(base32_encode_lower(data).size(), 32u);
}

TEST(HexEncode, Basic) {
  std::vector<std::uint8_t> data{0x00, 0x7f, 0xff};
  EXPECT_EQ(hex_encode(data), "007fff");
}

}  // namespace
}  // namespace odns::encoding
