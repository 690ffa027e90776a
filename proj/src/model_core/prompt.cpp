// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/model_core/prompt.hpp"

#include <algorithm>

#include "dyad/error.hpp"

namespace dyad::model {

using layout::Participant;

const std::vector<std::string>& default_system_words() {
  static const std::vector<std::string> words{"you", "are", "the", "listener", "reply", "with", "face", "text",
                                              "and", "voice"};
  return words;
}

void History::append_word(Participant who, const std::string& word) {
  if (turns_.empty() || turns_.back().who != who) turns_.push_back({who, {}});
  turns_.back().words.push_back(word);
}

void append_frame(History& history, const chrono::ChronoToken& speaker, const chrono::ChronoToken& listener) {
  if (speaker.is_word()) history.append_word(Participant::Speaker, speaker.text);
  if (listener.is_word()) history.append_word(Participant::Listener, listener.text);
}

std::size_t History::word_count() const {
  std::size_t n = 0;
  for (const auto& t : turns_) n += t.words.size();
  return n;
}

std::vector<std::int32_t> render_static(const Vocabulary& vocab, const std::vector<std::string>& system_words,
                                        const History& history, std::size_t length) {
  std::vector<std::int32_t> head{Vocabulary::kSystem};
  for (const auto& w : system_words) head.push_back(vocab.id(w));
  head.push_back(Vocabulary::kEnd);
  if (head.size() > length) {
    throw ConfigError("static prompt of " + std::to_string(length) + " tokens cannot hold the " +
                      std::to_string(head.size()) + "-token system message");
  }
  // Walk turns newest first, collecting rendered tokens in reverse.
  std::size_t budget = length - head.size();
  std::vector<std::int32_t> tail_rev;
  const auto& turns = history.turns();
  for (auto it = turns.rbegin(); it != turns.rend() && budget >= 3; ++it) {
    const std::int32_t role = it->who == Participant::Speaker ? Vocabulary::kUser : Vocabulary::kAssistant;
    const std::size_t fit = std::min(it->words.size(), budget - 2);
    tail_rev.push_back(Vocabulary::kEnd);
    for (std::size_t k = 0; k < fit; ++k) tail_rev.push_back(vocab.id(it->words[it->words.size() - 1 - k]));
    tail_rev.push_back(role);
    budget -= fit + 2;
    if (fit < it->words.size()) break;
  }
  std::vector<std::int32_t> out = head;
  out.resize(length - tail_rev.size(), Vocabulary::kPad);
  out.insert(out.end(), tail_rev.rbegin(), tail_rev.rend());
  return out;
}

std::string history_text(const History& history) {
  std::string out;
  for (const auto& t : history.turns()) {
    out += t.who == Participant::Speaker ? "user:" : "assistant:";
    for (const auto& w : t.words) out += " " + w;
    out += '\n';
  }
  return out;
}

}  // namespace dyad::model
