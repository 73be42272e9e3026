// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <span>

namespace odns {

// Injected randomness source. The system implementation is thread-safe;
// deterministic implementations are for tests only.
class Rng {
public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint16_t next_u16() {
    std::uint8_t b[2];
    fill(b);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }
};

// Operating-system CSPRNG (OpenSSL RAND). Throws RngFailure if the
// underlying generator reports an error.
class SystemRng final : public Rng {
public:
  void fill(std::span<std::uint8_t> out) override;
};

// Seeded generator for reproducible tests. Not cryptographically strong.
class DeterministicRng final : public Rng {
public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  void fill(std::span<std::uint8_t> out) override {
    std::lock_guard lock(mutex_);
    for (auto& b : out) b = static_cast<std::uint8_t>(engine_());
  }

private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

Rng& system_rng();

}  // namespace odns
