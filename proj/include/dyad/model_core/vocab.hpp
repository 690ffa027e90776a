// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/chrono_text/chrono.hpp"

namespace dyad::model {

/// Whole-word text vocabulary. Ids 0..7 are reserved for the chrono markers
/// and prompt specials; words follow in insertion order.
class Vocabulary {
 public:
  static constexpr std::int32_t kPause = 0;
  static constexpr std::int32_t kLasting = 1;
  static constexpr std::int32_t kSystem = 2;
  static constexpr std::int32_t kUser = 3;
  static constexpr std::int32_t kAssistant = 4;
  static constexpr std::int32_t kEnd = 5;
  static constexpr std::int32_t kPad = 6;
  static constexpr std::int32_t kUnk = 7;
  static constexpr std::int32_t kFirstWord = 8;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);

  /// Adds a word if absent; returns its id.
  std::int32_t add(const std::string& word);
  std::size_t size() const { return tokens_.size(); }
  /// Id of a word or special spelling; kUnk when unknown.
  std::int32_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  /// Words only, in id order (specials excluded).
  std::vector<std::string> words() const;

  std::int32_t encode(const chrono::ChronoToken& t) const;
  chrono::ChronoToken decode(std::int32_t id) const;
  std::vector<std::int32_t> encode(const std::vector<chrono::ChronoToken>& tokens) const;
  std::vector<std::int32_t> encode_words(std::string_view text) const;

  static bool is_special(std::int32_t id) { return id >= kSystem && id < kFirstWord; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::int32_t, std::less<>> index_;
};

}  // namespace dyad::model
