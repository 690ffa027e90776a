// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Online generation state. The window holds frames [start, next) of both
// participants; the listener half is what the model generated itself. When
// the window is full, its oldest frames are promoted: their words move to
// the static history prompt and their facial frames are dropped.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dyad/model_core/model.hpp"
#include "dyad/model_core/prompt.hpp"

namespace dyad::model {

struct DecodeOptions {
  double temperature = 0.0;  // 0 selects greedy decoding
  std::uint64_t seed = 1;
};

/// Text ids the listener may emit after `previous` (nullptr at frame 0):
/// every non-special id below the vocabulary size, minus Lasting when no
/// word is in progress.
std::vector<std::int32_t> allowed_listener_ids(const Vocabulary& vocab, const chrono::ChronoToken* previous);

/// Greedy (temperature 0) or seeded sampling restricted to `allowed`.
std::int32_t choose_token(std::span<const double> logits, const std::vector<std::int32_t>& allowed, double temperature,
                          std::mt19937_64& rng);

class StreamState {
 public:
  StreamState(const Model& model, std::vector<std::string> system_words, DecodeOptions decode = {});

  std::int64_t window_start() const { return start_; }
  std::int64_t next_frame() const { return start_ + static_cast<std::int64_t>(speaker_ids_.size()); }
  std::size_t window_frames() const { return speaker_ids_.size(); }
  const History& history() const { return history_; }
  /// Listener text hidden states of the current window (frames x d).
  const Tensor& text_hidden() const { return text_hidden_; }
  const Model& model() const { return model_; }
  const std::vector<chrono::ChronoToken>& speaker_tokens() const { return speaker_tokens_; }
  const std::vector<chrono::ChronoToken>& listener_tokens() const { return listener_tokens_; }

  /// Moves the oldest `count` frames into the history prompt. A no-op when
  /// `count` is 0; count larger than the window is a ContractError.
  void promote(std::size_t count);

 private:
  friend struct StepAccess;
  const Model& model_;
  std::vector<std::string> system_words_;
  DecodeOptions decode_;
  std::mt19937_64 rng_;
  History history_;
  std::int64_t start_ = 0;
  std::vector<std::vector<double>> speaker_faces_, listener_faces_;
  std::vector<chrono::ChronoToken> speaker_tokens_, listener_tokens_;
  std::vector<std::int32_t> speaker_ids_, listener_ids_;
  bool have_last_listener_ = false;
  chrono::ChronoToken last_listener_;
  bool have_prediction_ = false;
  std::vector<double> next_logits_, next_face_;
  Tensor text_hidden_;
};

/// Promotes promote_count() frames when the window is full; otherwise no-op.
/// Returns the number of frames promoted.
std::size_t promote_history(StreamState& state);

struct StepOutput {
  std::int64_t frame = 0;
  chrono::ChronoToken token;
  std::int32_t token_id = 0;
  std::vector<double> face;    // 64 values
  std::vector<double> hidden;  // H row of this frame
};

/// Generates the listener frame at state.next_frame() from the window
/// [start, next), then appends that frame (speaker inputs plus the generated
/// listener outputs) and runs the model on the extended window, which both
/// yields the H row and the prediction for the following frame.
StepOutput generate_step(StreamState& state, std::span<const double> speaker_face,
                         const chrono::ChronoToken& speaker_token);

}  // namespace dyad::model
