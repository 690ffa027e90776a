// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/training/windows.hpp"

#include <algorithm>

#include "dyad/error.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/model_core/prompt.hpp"
#include "dyad/tempovoice/tempovoice.hpp"

namespace dyad::train {

model::Vocabulary build_vocabulary(const std::vector<synth::DyadSample>& samples,
                                   const std::vector<std::string>& system_words) {
  model::Vocabulary v;
  for (const auto& w : system_words) v.add(w);
  for (const auto& s : samples) {
    for (const auto& w : s.speaker_words.words) v.add(w.text);
    for (const auto& w : s.listener_words.words) v.add(w.text);
  }
  return v;
}

EncodedDialogue encode_dialogue(const model::Vocabulary& vocab, const synth::DyadSample& s) {
  EncodedDialogue d;
  d.sample = &s;
  d.speaker_tokens = chrono::encode_transcript(s.speaker_words, s.fps, s.frames).tokens;
  d.listener_tokens = chrono::encode_transcript(s.listener_words, s.fps, s.frames).tokens;
  d.speaker_ids = vocab.encode(d.speaker_tokens);
  d.listener_ids = vocab.encode(d.listener_tokens);
  return d;
}

std::size_t window_length(const model::ModelConfig& cfg, const synth::DyadSample& s) {
  return std::min(cfg.context_window_frames, s.frames);
}

WindowExample make_window(const model::Model& model, const EncodedDialogue& d, std::size_t start,
                          const std::vector<std::string>& system_words) {
  const synth::DyadSample& s = *d.sample;
  const auto& cfg = model.config();
  const std::size_t W = window_length(cfg, s);
  if (W == 0) throw ContractError("dialogue '" + s.id + "' has no frames");
  if (start + W > s.frames) throw ContractError("window start " + std::to_string(start) + " runs past the dialogue");
  if (s.audio_tokens_per_frame != cfg.voice.tokens_per_frame) {
    throw ContractError("dialogue '" + s.id + "' has " + s.audio_tokens_per_frame.str() +
                        " audio tokens per frame, the model expects " + cfg.voice.tokens_per_frame.str());
  }

  model::History history;
  for (std::size_t f = 0; f < start; ++f) model::append_frame(history, d.speaker_tokens[f], d.listener_tokens[f]);

  WindowExample w;
  w.voiceprint = &s.voiceprint;
  auto& in = w.input;
  in.static_ids = model::render_static(model.vocab(), system_words, history, cfg.static_tokens);
  in.first_frame = static_cast<std::int64_t>(start);
  in.speaker_faces = Tensor(W, model::kFacialDim);
  in.listener_faces = Tensor(W, model::kFacialDim);
  for (std::size_t f = 0; f < W; ++f) {
    for (std::size_t c = 0; c < model::kFacialDim; ++c) {
      in.speaker_faces(f, c) = s.speaker_faces(start + f, c);
      in.listener_faces(f, c) = s.listener_faces(start + f, c);
    }
  }
  in.speaker_ids.assign(d.speaker_ids.begin() + static_cast<long>(start),
                        d.speaker_ids.begin() + static_cast<long>(start + W));
  in.listener_ids.assign(d.listener_ids.begin() + static_cast<long>(start),
                         d.listener_ids.begin() + static_cast<long>(start + W));

  w.first_target_frame = start == 0 ? 0 : static_cast<std::int64_t>(start) + 1;
  const std::size_t end = std::min(s.frames, start + W + 1);
  const std::size_t first = static_cast<std::size_t>(w.first_target_frame);
  w.face_targets = Tensor(end - first, model::kFacialDim);
  for (std::size_t f = first; f < end; ++f) {
    w.text_targets.push_back(d.listener_ids[f]);
    for (std::size_t c = 0; c < model::kFacialDim; ++c) w.face_targets(f - first, c) = s.listener_faces(f, c);
  }

  const Rational r = cfg.voice.tokens_per_frame;
  const auto mu0 = static_cast<std::size_t>(voice::first_token(static_cast<std::int64_t>(start), r));
  const auto mu1 = static_cast<std::size_t>(voice::first_token(static_cast<std::int64_t>(start + W), r));
  if (mu1 > s.listener_audio.size()) throw ContractError("dialogue '" + s.id + "' has too few audio tokens");
  w.audio_targets.assign(s.listener_audio.begin() + static_cast<long>(mu0),
                         s.listener_audio.begin() + static_cast<long>(mu1));
  for (auto a : w.audio_targets) {
    if (a < 0 || static_cast<std::size_t>(a) >= cfg.audio_vocab()) {
      throw ValidationError("dialogue '" + s.id + "' has audio token " + std::to_string(a) + " outside the vocabulary");
    }
  }
  return w;
}

WindowRun run_window(nn::Scope& p, const model::Model& model, const WindowExample& w, const LossWeights& weights) {
  const auto& cfg = model.config();
  WindowRun out;
  out.forward = model.forward(p, w.input);
  const std::size_t rows = w.text_targets.size();
  out.text_logits = grad::slice_rows(out.forward.next_text_logits, 0, rows);
  out.faces = grad::slice_rows(out.forward.next_faces, 0, rows);
  Var vp = voice::embed_voiceprint(p, cfg.voice, *w.voiceprint);
  out.audio_logits = voice::forward(p, cfg.voice, cfg.n_heads, out.forward.text_hidden, vp, w.input.first_frame);
  out.loss = compute_losses(out.text_logits, w.text_targets, out.faces, w.face_targets, out.audio_logits,
                            w.audio_targets, weights);
  return out;
}

}  // namespace dyad::train
