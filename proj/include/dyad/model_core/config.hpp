// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "dyad/layout_mask/layout.hpp"
#include "dyad/tempovoice/config.hpp"

namespace dyad::model {

inline constexpr std::size_t kFacialDim = 64;
inline constexpr std::size_t kBlendshapeDim = 52;
inline constexpr std::size_t kPoseDim = 12;
/// Index of the jaw-open blendshape in the 52-channel ARKit ordering.
inline constexpr std::size_t kJawOpen = 25;

enum class ProjectorKind { Mlp, Linear };

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t n_layers = 4;
  std::size_t n_heads = 4;
  std::size_t text_vocab = 256;
  std::size_t mlp_ratio = 4;
  ProjectorKind projector = ProjectorKind::Mlp;
  std::size_t projector_hidden = 128;
  std::size_t vision_layers = 2;
  /// Dynamic window length in frames.
  std::size_t context_window_frames = 128;
  /// Frames moved into history when the window is full (0 = half the window).
  std::size_t promote_frames = 0;
  /// Static prompt length in tokens (system prompt + padding + history tail).
  std::size_t static_tokens = 48;
  /// Same-frame slots at earlier positions are visible, so the listener
  /// prediction for frame t sees every input of frame t-1.
  bool same_time_visible = true;
  layout::InterleaveOrder order = layout::default_order();
  voice::TempoVoiceConfig voice{};
  double init_std = 0.02;
  std::uint64_t seed = 1;

  std::size_t audio_vocab() const { return voice.audio_vocab; }
  std::size_t promote_count() const {
    return promote_frames == 0 ? (context_window_frames + 1) / 2 : promote_frames;
  }
  std::size_t max_positions() const { return static_tokens + 4 * context_window_frames; }

  /// Throws ConfigError on inconsistent values.
  void validate() const;

  /// Applies one `key=value` setting; returns false for keys it does not own.
  bool set(std::string_view key, std::string_view value);
  /// Serialized as `key=value` lines that set() accepts.
  std::string to_kv() const;
};

}  // namespace dyad::model
