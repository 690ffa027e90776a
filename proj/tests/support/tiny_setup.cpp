// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tiny_setup.hpp"

#include "dyad/model_core/prompt.hpp"
#include "dyad/training/windows.hpp"

namespace dyad::testing {

synth::SynthSpec tiny_spec() {
  synth::SynthSpec s;
  s.frames = 40;
  s.audio_vocab = 8;
  s.voiceprint_dim = 8;
  return s;
}

std::vector<synth::DyadSample> tiny_dialogues(std::size_t n, std::uint64_t first_seed) {
  std::vector<synth::DyadSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth::generate_dialogue(first_seed + i, tiny_spec()));
  return out;
}

model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.d_model = 16;
  c.n_layers = 2;
  c.n_heads = 2;
  c.text_vocab = 64;
  c.mlp_ratio = 2;
  c.projector_hidden = 16;
  c.vision_layers = 1;
  c.context_window_frames = 12;
  c.static_tokens = 20;
  c.voice.audio_vocab = 8;
  c.voice.voiceprint_dim = 8;
  c.voice.n_layers = 1;
  c.init_std = 0.1;
  return c;
}

model::Vocabulary tiny_vocab(const std::vector<synth::DyadSample>& samples) {
  return train::build_vocabulary(samples, model::default_system_words());
}

}  // namespace dyad::testing
