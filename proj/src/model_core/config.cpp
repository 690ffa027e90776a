// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/model_core/config.hpp"

#include <sstream>

#include "dyad/error.hpp"
#include "dyad/kv_config.hpp"

namespace dyad {
namespace voice {

std::string_view memory_mode_name(MemoryMode m) {
  switch (m) {
    case MemoryMode::Window:
      return "window";
    case MemoryMode::Causal:
      return "causal";
    case MemoryMode::LastFrames:
      return "last_frames";
  }
  return "?";
}

MemoryMode parse_memory_mode(std::string_view s) {
  if (s == "window") return MemoryMode::Window;
  if (s == "causal") return MemoryMode::Causal;
  if (s == "last_frames") return MemoryMode::LastFrames;
  throw ConfigError("unknown tempovoice memory mode '" + std::string(s) + "' (window|causal|last_frames)");
}

}  // namespace voice

namespace model {

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("model config: " + m); };
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) fail("d_model must be a positive multiple of n_heads");
  if (d_model % 2 != 0) fail("d_model must be even (sinusoidal positions)");
  if (text_vocab < 4 || voice.audio_vocab < 4) fail("vocabulary sizes must be at least 4");
  if (context_window_frames == 0) fail("context_window_frames must be positive");
  if (promote_count() == 0 || promote_count() > context_window_frames) fail("promote_frames out of range");
  if (static_tokens < 4) fail("static_tokens must leave room for the system prompt");
  if (!voice.tokens_per_frame.positive()) fail("audio_tokens_per_frame must be positive");
  if (mlp_ratio == 0 || projector_hidden == 0) fail("hidden sizes must be positive");
  if (voice.memory == voice::MemoryMode::LastFrames && voice.last_k == 0) fail("tempovoice_last_k must be positive");
  if (voice.voiceprint_dim == 0) fail("voiceprint_dim must be positive");
  if (!(init_std > 0.0)) fail("init_std must be positive");
}

bool ModelConfig::set(std::string_view key, std::string_view value) {
  if (key == "d_model") {
    d_model = kv_size(key, value);
  } else if (key == "n_layers") {
    n_layers = kv_size(key, value);
  } else if (key == "n_heads") {
    n_heads = kv_size(key, value);
  } else if (key == "text_vocab") {
    text_vocab = kv_size(key, value);
  } else if (key == "audio_vocab") {
    voice.audio_vocab = kv_size(key, value);
  } else if (key == "mlp_ratio") {
    mlp_ratio = kv_size(key, value);
  } else if (key == "projector") {
    if (value == "mlp") {
      projector = ProjectorKind::Mlp;
    } else if (value == "linear") {
      projector = ProjectorKind::Linear;
    } else {
      throw ConfigError("projector must be mlp or linear");
    }
  } else if (key == "projector_hidden") {
    projector_hidden = kv_size(key, value);
  } else if (key == "vision_layers") {
    vision_layers = kv_size(key, value);
  } else if (key == "context_window_frames") {
    context_window_frames = kv_size(key, value);
  } else if (key == "promote_frames") {
    promote_frames = kv_size(key, value);
  } else if (key == "static_tokens") {
    static_tokens = kv_size(key, value);
  } else if (key == "same_time_visible") {
    same_time_visible = kv_bool(key, value);
  } else if (key == "interleave_order") {
    order = layout::parse_order(value);
  } else if (key == "audio_tokens_per_frame") {
    voice.tokens_per_frame = Rational::parse(value);
  } else if (key == "tempovoice_layers") {
    voice.n_layers = kv_size(key, value);
  } else if (key == "tempovoice_memory") {
    voice.memory = voice::parse_memory_mode(value);
  } else if (key == "tempovoice_last_k") {
    voice.last_k = kv_size(key, value);
  } else if (key == "voiceprint_dim") {
    voice.voiceprint_dim = kv_size(key, value);
  } else if (key == "init_std") {
    init_std = kv_double(key, value);
  } else if (key == "model_seed") {
    seed = kv_u64(key, value);
  } else {
    return false;
  }
  return true;
}

std::string ModelConfig::to_kv() const {
  std::ostringstream os;
  os.precision(17);
  os << "d_model=" << d_model << "\nn_layers=" << n_layers << "\nn_heads=" << n_heads << "\ntext_vocab=" << text_vocab
     << "\naudio_vocab=" << voice.audio_vocab << "\nmlp_ratio=" << mlp_ratio
     << "\nprojector=" << (projector == ProjectorKind::Mlp ? "mlp" : "linear") << "\nprojector_hidden=" << projector_hidden
     << "\nvision_layers=" << vision_layers << "\ncontext_window_frames=" << context_window_frames
     << "\npromote_frames=" << promote_frames << "\nstatic_tokens=" << static_tokens
     << "\nsame_time_visible=" << (same_time_visible ? "true" : "false")
     << "\ninterleave_order=" << layout::order_str(order) << "\naudio_tokens_per_frame=" << voice.tokens_per_frame.str()
     << "\ntempovoice_layers=" << voice.n_layers << "\ntempovoice_memory=" << voice::memory_mode_name(voice.memory)
     << "\ntempovoice_last_k=" << voice.last_k << "\nvoiceprint_dim=" << voice.voiceprint_dim << "\ninit_std=" << init_std << "\nmodel_seed=" << seed << "\n";
  return os.str();
}

}  // namespace model
}  // namespace dyad
