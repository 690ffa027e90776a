// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyad/model_core/stream.hpp"
#include "dyad/synth_data/synth.hpp"
#include "dyad/tempovoice/codec.hpp"

namespace dyad::stream {

struct StreamOptions {
  std::vector<std::string> system_words;
  model::DecodeOptions decode;
  std::int64_t sample_rate = 16000;
  /// Stop after this many frames (0 = the whole dialogue).
  std::size_t max_frames = 0;
};

struct StreamOutput {
  grad::Tensor faces;                       // frames x 64
  std::vector<chrono::ChronoToken> tokens;  // one per frame
  std::vector<std::int32_t> audio;          // ceil(frames * r)
  std::vector<double> waveform;             // toy codec rendering of `audio`
  model::History history;                   // promoted history at the end
  voice::CodecSpec codec;

  std::size_t frames() const { return tokens.size(); }
};

/// Codec matching a model config and a frame rate.
voice::CodecSpec codec_for(const model::ModelConfig& cfg, Rational fps, std::int64_t sample_rate);

/// Frame-by-frame generation of the listener for a dialogue: one
/// generate_step per frame, then the audio head on the current window, of
/// which the rows owned by the new frame are kept (greedy).
StreamOutput run_stream(const model::Model& model, const synth::DyadSample& sample, const StreamOptions& opts);

/// Marked text, one token per line: the frame index, a tab, the spelling.
std::string marked_text(const std::vector<chrono::ChronoToken>& tokens);
/// Readable transcript: words only, [LASTING] removed, pauses collapsed.
std::string readable_transcript(const std::vector<chrono::ChronoToken>& tokens);
/// Both parties, one "speaker: ..." or "listener: ..." line per turn. A turn
/// closes when its party pauses or the other party starts a word.
std::string dialogue_transcript(const std::vector<chrono::ChronoToken>& speaker,
                                const std::vector<chrono::ChronoToken>& listener);

}  // namespace dyad::stream
