// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/model_core/vocab.hpp"

#include <sstream>

#include "dyad/error.hpp"

namespace dyad::model {

Vocabulary::Vocabulary() {
  for (const char* s : {"[PAUSE]", "[LASTING]", "<|system|>", "<|user|>", "<|assistant|>", "<|end|>", "<|pad|>",
                        "[UNK]"}) {
    index_.emplace(s, static_cast<std::int32_t>(tokens_.size()));
    tokens_.emplace_back(s);
  }
}

Vocabulary::Vocabulary(const std::vector<std::string>& words) : Vocabulary() {
  for (const auto& w : words) add(w);
}

std::int32_t Vocabulary::add(const std::string& word) {
  if (word.empty()) throw ValidationError("empty vocabulary word");
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(tokens_.size());
  index_.emplace(word, id);
  tokens_.push_back(word);
  return id;
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.find(token) != index_.end(); }

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocabulary::words() const {
  return {tokens_.begin() + kFirstWord, tokens_.end()};
}

std::int32_t Vocabulary::encode(const chrono::ChronoToken& t) const {
  if (t.is_pause()) return kPause;
  if (t.is_lasting()) return kLasting;
  return id(t.text);
}

chrono::ChronoToken Vocabulary::decode(std::int32_t id) const {
  if (id == kPause) return chrono::ChronoToken::pause();
  if (id == kLasting) return chrono::ChronoToken::lasting();
  return chrono::ChronoToken::word(token(id));
}

std::vector<std::int32_t> Vocabulary::encode(const std::vector<chrono::ChronoToken>& tokens) const {
  std::vector<std::int32_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(encode(t));
  return out;
}

std::vector<std::int32_t> Vocabulary::encode_words(std::string_view text) const {
  std::istringstream in{std::string(text)};
  std::vector<std::int32_t> out;
  std::string w;
  while (in >> w) out.push_back(id(w));
  return out;
}

}  // namespace dyad::model
