// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Static prompt: a chat-style system message followed by the conversation
// history, the speaker as "user" and the listener as "assistant":
//
//   <|system|> ... <|end|> <|pad|>* <|user|> w w <|end|> <|assistant|> w <|end|>

#include <cstdint>
#include <string>
#include <vector>

#include "dyad/layout_mask/layout.hpp"
#include "dyad/model_core/vocab.hpp"

namespace dyad::model {

/// Words of the default system message.
const std::vector<std::string>& default_system_words();

struct HistoryTurn {
  layout::Participant who = layout::Participant::Speaker;
  std::vector<std::string> words;
  friend bool operator==(const HistoryTurn&, const HistoryTurn&) = default;
};

/// Append-only conversation history.
class History {
 public:
  /// Extends the last turn when `who` spoke it, else opens a new turn.
  void append_word(layout::Participant who, const std::string& word);
  const std::vector<HistoryTurn>& turns() const { return turns_; }
  std::size_t word_count() const;
  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<HistoryTurn> turns_;
};

/// Appends the words that start in one frame: the speaker's first, then the
/// listener's. Pause and Lasting add nothing.
void append_frame(History& history, const chrono::ChronoToken& speaker, const chrono::ChronoToken& listener);

/// Exactly `length` ids: the system message, padding, then as much of the
/// history as fits, newest kept. A turn cut at the front keeps its role tag.
/// Throws ConfigError when the system message alone does not fit.
std::vector<std::int32_t> render_static(const Vocabulary& vocab, const std::vector<std::string>& system_words,
                                        const History& history, std::size_t length);

/// Human-readable form of a history, one turn per line.
std::string history_text(const History& history);

}  // namespace dyad::model
