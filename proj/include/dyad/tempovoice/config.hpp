// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "dyad/rational.hpp"

namespace dyad::voice {

/// Which memory rows (text hidden states) a placeholder may cross-attend.
/// The voiceprint row is always visible.
enum class MemoryMode {
  Window,     // every frame of the window
  Causal,     // frames up to the placeholder's owning frame
  LastFrames  // the last `last_k` frames up to the owning frame
};

std::string_view memory_mode_name(MemoryMode m);
MemoryMode parse_memory_mode(std::string_view s);

struct TempoVoiceConfig {
  Rational tokens_per_frame{2};  // r
  std::size_t n_layers = 2;
  std::size_t audio_vocab = 64;
  MemoryMode memory = MemoryMode::Causal;
  std::size_t last_k = 2;
  std::size_t voiceprint_dim = 64;  // raw identity embedding, projected to d_model
};

}  // namespace dyad::voice
