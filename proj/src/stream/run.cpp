// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/stream/run.hpp"

#include <sstream>

#include "dyad/error.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/tempovoice/tempovoice.hpp"

namespace dyad::stream {

voice::CodecSpec codec_for(const model::ModelConfig& cfg, Rational fps, std::int64_t sample_rate) {
  voice::CodecSpec c;
  c.sample_rate = sample_rate;
  c.fps = fps;
  c.tokens_per_frame = cfg.voice.tokens_per_frame;
  c.audio_vocab = cfg.audio_vocab();
  c.validate();
  return c;
}

StreamOutput run_stream(const model::Model& model, const synth::DyadSample& sample, const StreamOptions& opts) {
  const auto& cfg = model.config();
  if (sample.audio_tokens_per_frame != cfg.voice.tokens_per_frame) {
    throw ContractError("sample '" + sample.id + "' uses " + sample.audio_tokens_per_frame.str() +
                        " audio tokens per frame, the model " + cfg.voice.tokens_per_frame.str());
  }
  if (sample.voiceprint.size() != cfg.voice.voiceprint_dim) {
    throw ContractError("sample '" + sample.id + "' voiceprint has " + std::to_string(sample.voiceprint.size()) +
                        " values, the model expects " + std::to_string(cfg.voice.voiceprint_dim));
  }
  if (sample.speaker_faces.rows() != sample.frames) throw ContractError("speaker faces do not cover every frame");

  StreamOutput out;
  out.codec = codec_for(cfg, sample.fps, opts.sample_rate);
  const std::size_t n = opts.max_frames == 0 ? sample.frames : std::min(opts.max_frames, sample.frames);
  const auto speaker = chrono::encode_transcript(sample.speaker_words, sample.fps, sample.frames).tokens;
  const Rational r = cfg.voice.tokens_per_frame;

  model::StreamState state(model, opts.system_words, opts.decode);
  out.faces = grad::Tensor(n, model::kFacialDim);
  auto& store = const_cast<grad::ParameterStore&>(model.params());
  for (std::size_t t = 0; t < n; ++t) {
    const auto step = model::generate_step(state, sample.speaker_faces.row(t), speaker[t]);
    out.tokens.push_back(step.token);
    for (std::size_t c = 0; c < model::kFacialDim; ++c) out.faces(t, c) = step.face[c];

    grad::Graph g;
    nn::Scope p(g, store);  // read-only use, see StreamState
    const grad::Var h = g.constant(state.text_hidden());
    const grad::Var vp = voice::embed_voiceprint(p, cfg.voice, sample.voiceprint);
    const grad::Var logits = voice::forward(p, cfg.voice, cfg.n_heads, h, vp, state.window_start());
    const auto ids = grad::argmax_rows(logits.value());
    const auto frame = static_cast<std::int64_t>(t);
    const std::int64_t base = voice::first_token(state.window_start(), r);
    for (std::int64_t mu = voice::first_token(frame, r); mu < voice::first_token(frame + 1, r); ++mu) {
      out.audio.push_back(ids[static_cast<std::size_t>(mu - base)]);
    }
  }
  out.history = state.history();
  out.waveform = voice::toy_decode(out.audio, out.codec);
  return out;
}

std::string marked_text(const std::vector<chrono::ChronoToken>& tokens) {
  std::ostringstream os;
  for (std::size_t t = 0; t < tokens.size(); ++t) os << t << '\t' << tokens[t].spelling() << '\n';
  return os.str();
}

std::string readable_transcript(const std::vector<chrono::ChronoToken>& tokens) {
  std::string out;
  bool gap = false;
  for (const auto& t : tokens) {
    if (t.is_word()) {
      if (!out.empty()) out += gap ? "\n" : " ";
      out += t.text;
      gap = false;
    } else if (t.is_pause() && !out.empty()) {
      gap = true;
    }
  }
  if (!out.empty()) out += '\n';
  return out;
}

std::string dialogue_transcript(const std::vector<chrono::ChronoToken>& speaker,
                                const std::vector<chrono::ChronoToken>& listener) {
  if (speaker.size() != listener.size()) throw ContractError("dialogue_transcript: streams differ in length");
  std::string out;
  int who = -1;  // party of the open line
  bool open = false;
  auto feed = [&](int party, const chrono::ChronoToken& t) {
    if (t.is_word()) {
      if (!open || who != party) {
        if (!out.empty()) out += '\n';
        out += party == 0 ? "speaker:" : "listener:";
        who = party;
        open = true;
      }
      out += ' ' + t.text;
    } else if (t.is_pause() && who == party) {
      open = false;
    }
  };
  for (std::size_t f = 0; f < speaker.size(); ++f) {
    feed(0, speaker[f]);
    feed(1, listener[f]);
  }
  if (!out.empty()) out += '\n';
  return out;
}

}  // namespace dyad::stream
