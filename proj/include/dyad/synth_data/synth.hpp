// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Synthetic two-person conversations. A speaker says a phrase from a small
// topic grammar, the listener answers with the reply tied to that phrase
// after a fixed delay, and the speaker starts again after a random gap.
// Faces are piecewise-constant with small noise, except the jaw-open
// channel, which is exactly 0.6 on the person's own word frames and 0.05
// elsewhere.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/chrono_text/chrono.hpp"
#include "dyad/grad/tensor.hpp"
#include "dyad/rational.hpp"

namespace dyad::synth {

inline constexpr double kJawSpeaking = 0.6;
inline constexpr double kJawSilent = 0.05;

struct DyadSample {
  std::string id;
  std::string topic;
  Rational fps{10};
  std::size_t frames = 0;
  grad::Tensor speaker_faces;   // frames x 64
  grad::Tensor listener_faces;  // frames x 64
  chrono::TimedTranscript speaker_words{{}, chrono::Channel::Speaker};
  chrono::TimedTranscript listener_words{{}, chrono::Channel::Listener};
  Rational audio_tokens_per_frame{2};
  std::vector<std::int32_t> listener_audio;  // ceil(frames * r) tokens
  std::vector<double> voiceprint;

  double duration() const { return static_cast<double>(frames) * fps.den() / fps.num(); }
  /// Throws ValidationError when streams disagree on length, transcripts do
  /// not fit, or faces are out of range.
  void validate() const;
};

struct SynthSpec {
  Rational fps{10};
  std::size_t frames = 120;
  std::size_t lead_in_min = 1, lead_in_max = 4;      // frames before the first turn
  std::size_t phrase_words_min = 2, phrase_words_max = 4;
  std::size_t response_delay = 2;                    // speaker end -> listener start
  std::size_t gap_min = 3, gap_max = 8;              // listener end -> next speaker start
  bool listener_silent = false;
  // The audio rate, audio vocabulary and voiceprint size follow the model
  // config and have no config keys of their own.
  Rational audio_tokens_per_frame{2};
  std::size_t audio_vocab = 64;
  std::size_t voiceprint_dim = 64;
  double face_noise = 0.01;

  void validate() const;
  bool set(std::string_view key, std::string_view value);
  std::string to_kv() const;
};

/// Every word the grammar can produce, in a fixed order.
const std::vector<std::string>& grammar_words();
/// Frames a word lasts: 2 + (length of the word mod 3).
std::size_t word_frames(std::string_view word);
/// Listener reply for a speaker phrase.
std::vector<std::string> reply_for(const std::vector<std::string>& phrase);
/// Audio token of a listener word frame: 1 + hash(word) mod (vocab - 1).
std::int32_t word_audio_token(std::string_view word, std::size_t audio_vocab);

/// Fully determined by (seed, spec). Throws ConfigError when the spec cannot
/// fit a single exchange into the requested length.
DyadSample generate_dialogue(std::uint64_t seed, const SynthSpec& spec);

/// 1.0 on frames covered by a word of `t`, else 0.0.
std::vector<double> word_occupancy(const chrono::TimedTranscript& t, Rational fps, std::size_t frames);

}  // namespace dyad::synth
