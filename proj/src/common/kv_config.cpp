// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/kv_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dyad/error.hpp"

namespace dyad {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, const char* what) {
  throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) + "' is not " + what);
}

}  // namespace

std::vector<KvEntry> parse_kv(std::string_view text, const std::string& source) {
  std::vector<KvEntry> out;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = trim(text.substr(begin, end - begin));
    begin = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    out.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

std::vector<KvEntry> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kv(ss.str(), path);
}

std::uint64_t kv_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad(key, value, "a non-negative integer");
  return v;
}

std::size_t kv_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(kv_u64(key, value));
}

double kv_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used != value.size() || !std::isfinite(v)) bad(key, value, "a finite number");
    return v;
  } catch (const std::logic_error&) {
    bad(key, value, "a finite number");
  }
}

bool kv_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad(key, value, "a boolean");
}

}  // namespace dyad
