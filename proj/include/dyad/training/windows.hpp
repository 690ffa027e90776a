// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Turning dialogues into model windows. A window covers frames
// [start, start + W); its static prompt is the system message plus the
// conversation history of frames [0, start). Targets are the listener text
// tokens and facial frames the window's prediction rows are responsible for,
// and the listener audio tokens owned by the window's frames.

#include <cstdint>
#include <vector>

#include "dyad/model_core/model.hpp"
#include "dyad/synth_data/synth.hpp"
#include "dyad/training/losses.hpp"

namespace dyad::train {

/// Specials, the system message words, then every word of the dialogues in
/// first-seen order (speaker before listener within a dialogue).
model::Vocabulary build_vocabulary(const std::vector<synth::DyadSample>& samples,
                                   const std::vector<std::string>& system_words);

struct EncodedDialogue {
  const synth::DyadSample* sample = nullptr;
  std::vector<chrono::ChronoToken> speaker_tokens, listener_tokens;
  std::vector<std::int32_t> speaker_ids, listener_ids;
};

EncodedDialogue encode_dialogue(const model::Vocabulary& vocab, const synth::DyadSample& s);

struct WindowExample {
  model::WindowInput input;
  std::vector<std::int32_t> text_targets;  // one per used prediction row
  Tensor face_targets;                      // same rows x 64
  std::vector<std::int32_t> audio_targets;  // tokens owned by the window frames
  std::int64_t first_target_frame = 0;
  const std::vector<double>* voiceprint = nullptr;
};

/// Window length used for a dialogue: min(context_window_frames, frames).
std::size_t window_length(const model::ModelConfig& cfg, const synth::DyadSample& s);

WindowExample make_window(const model::Model& model, const EncodedDialogue& d, std::size_t start,
                          const std::vector<std::string>& system_words);

struct WindowRun {
  model::ForwardResult forward;
  Var text_logits;   // rows restricted to targets
  Var faces;
  Var audio_logits;
  LossTerms loss;
};

/// Model forward + audio head + losses for one window.
WindowRun run_window(nn::Scope& p, const model::Model& model, const WindowExample& w, const LossWeights& weights);

}  // namespace dyad::train
