// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Plain `key = value` configuration files. Blank lines and lines starting
// with '#' are ignored; later assignments override earlier ones.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dyad {

struct KvEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::vector<KvEntry> parse_kv(std::string_view text, const std::string& source = "<config>");
std::vector<KvEntry> read_kv_file(const std::string& path);

// Value parsers; throw ConfigError naming the key.
std::size_t kv_size(std::string_view key, std::string_view value);
std::uint64_t kv_u64(std::string_view key, std::string_view value);
double kv_double(std::string_view key, std::string_view value);
bool kv_bool(std::string_view key, std::string_view value);

}  // namespace dyad
