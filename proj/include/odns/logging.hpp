// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <chrono>
#include <initializer_list>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace odns {

// One `ts=... key=value ...` line per event, interleaving-safe.
inline void log_line(std::ostream* out,
                     std::initializer_list<std::pair<std::string_view, std::string>> fields) {
  if (!out) return;
  static std::mutex mutex;
  auto now = std::chrono::duration_cast<std::chrono::microseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
                 .count();
  std::lock_guard lock(mutex);
  *out << "ts=" << now;
  for (const auto& [key, value] : fields) *out << ' ' << key << '=' << value;
  *out << '\n';
}

}  // namespace odns
