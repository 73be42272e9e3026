// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace odns::config {

// `key = value` text, one pair per line, '#' starts a comment.
std::map<std::string, std::string> parse_kv_text(std::string_view text);
std::map<std::string, std::string> load_kv_file(const std::string& path);

// "250ms", "2s", "5m", "12h", "7d"; a bare integer means seconds.
std::chrono::milliseconds parse_duration(std::string_view text);

std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace odns::config
