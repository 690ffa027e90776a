// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/tempovoice/tempovoice.hpp"

#include "dyad/error.hpp"
#include "dyad/grad/ops.hpp"

namespace dyad::voice {

std::int64_t token_count(std::int64_t frames, Rational r) { return r.ceil_mul(frames); }
std::int64_t first_token(std::int64_t frame, Rational r) { return r.ceil_mul(frame); }
std::int64_t owner_frame(std::int64_t mu, Rational r) { return r.floor_div_by(mu); }
std::int64_t tokens_in_frame(std::int64_t frame, Rational r) { return r.ceil_mul(frame + 1) - r.ceil_mul(frame); }

Tensor make_placeholders(std::size_t n_frames, const TempoVoiceConfig& cfg, std::size_t d) {
  const auto m = static_cast<std::size_t>(token_count(static_cast<std::int64_t>(n_frames), cfg.tokens_per_frame));
  std::vector<double> pos(m);
  for (std::size_t i = 0; i < m; ++i) pos[i] = static_cast<double>(i);
  return nn::sinusoidal(pos, d);
}

void add_params(grad::ParameterStore& s, std::size_t d, const TempoVoiceConfig& cfg, std::size_t mlp_ratio,
                double stddev, std::uint64_t seed) {
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    nn::add_block(s, "tv.L" + std::to_string(i), d, mlp_ratio * d, stddev, seed, /*cross=*/true);
  }
  nn::add_linear(s, "tv.vp", cfg.voiceprint_dim, d, stddev, seed);
  nn::add_layer_norm(s, "tv.lnf", d);
  nn::add_linear(s, "tv.head", d, cfg.audio_vocab, stddev, seed);
}

Var embed_voiceprint(nn::Scope& p, const TempoVoiceConfig& cfg, const std::vector<double>& voiceprint) {
  if (voiceprint.size() != cfg.voiceprint_dim) {
    throw DimensionError("voiceprint has " + std::to_string(voiceprint.size()) + " values, expected " +
                         std::to_string(cfg.voiceprint_dim));
  }
  Tensor row(1, voiceprint.size());
  for (std::size_t i = 0; i < voiceprint.size(); ++i) row(0, i) = voiceprint[i];
  return nn::linear(p, "tv.vp", p.graph().constant(std::move(row)));
}

std::vector<std::uint8_t> cross_mask_bits(const TempoVoiceConfig& cfg, std::int64_t first_frame, std::size_t frames) {
  const Rational r = cfg.tokens_per_frame;
  const std::int64_t mu0 = first_token(first_frame, r);
  const std::int64_t mu1 = first_token(first_frame + static_cast<std::int64_t>(frames), r);
  const std::size_t cols = frames + 1;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(mu1 - mu0) * cols, 0);
  for (std::int64_t mu = mu0; mu < mu1; ++mu) {
    const std::size_t row = static_cast<std::size_t>(mu - mu0);
    const std::int64_t owner = owner_frame(mu, r);
    bits[row * cols] = 1;  // voiceprint
    for (std::size_t f = 0; f < frames; ++f) {
      const std::int64_t t = first_frame + static_cast<std::int64_t>(f);
      bool ok = true;
      if (cfg.memory == MemoryMode::Causal) ok = t <= owner;
      if (cfg.memory == MemoryMode::LastFrames) ok = t <= owner && t > owner - static_cast<std::int64_t>(cfg.last_k);
      bits[row * cols + 1 + f] = ok ? 1 : 0;
    }
  }
  return bits;
}

Var forward(nn::Scope& p, const TempoVoiceConfig& cfg, std::size_t n_heads, Var h, Var voiceprint,
            std::int64_t first_frame) {
  const Rational r = cfg.tokens_per_frame;
  const auto frames = static_cast<std::int64_t>(h.rows());
  const auto m = static_cast<std::size_t>(first_token(first_frame + frames, r) - first_token(first_frame, r));
  std::vector<double> slot_pos(m);
  for (std::size_t i = 0; i < m; ++i) slot_pos[i] = static_cast<double>(i);
  Var queries = p.graph().constant(nn::sinusoidal(slot_pos, h.cols()));
  return forward_queries(p, cfg, n_heads, queries, h, voiceprint, first_frame);
}

Var forward_queries(nn::Scope& p, const TempoVoiceConfig& cfg, std::size_t n_heads, Var queries, Var h,
                    Var voiceprint, std::int64_t first_frame) {
  const std::size_t frames = h.rows();
  const std::size_t d = h.cols();
  if (frames == 0) throw ContractError("tempovoice needs at least one hidden row");
  if (voiceprint.rows() != 1 || voiceprint.cols() != d) {
    throw ContractError("voiceprint must be 1 x " + std::to_string(d) + ", got " + voiceprint.value().shape_str());
  }
  const Rational r = cfg.tokens_per_frame;
  const std::int64_t mu0 = first_token(first_frame, r);
  const auto m = static_cast<std::size_t>(first_token(first_frame + static_cast<std::int64_t>(frames), r) - mu0);
  if (queries.rows() != m || queries.cols() != d) {
    throw ContractError("tempovoice expects " + std::to_string(m) + " x " + std::to_string(d) + " queries, got " +
                        queries.value().shape_str());
  }
  grad::Graph& g = p.graph();

  std::vector<double> frame_pos(frames);
  for (std::size_t f = 0; f < frames; ++f) frame_pos[f] = static_cast<double>(f) * r.to_double();
  Var memory = grad::concat_rows({voiceprint, grad::add(h, g.constant(nn::sinusoidal(frame_pos, d)))});

  const auto self_bits = nn::causal_bits(m);
  const auto cross_bits = cross_mask_bits(cfg, first_frame, frames);
  const grad::VisibilityView self_view{self_bits.data(), m, m};
  const grad::VisibilityView cross_view{cross_bits.data(), m, frames + 1};
  Var x = queries;
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    x = nn::cross_block(p, "tv.L" + std::to_string(i), x, memory, self_view, cross_view, n_heads);
  }
  return nn::linear(p, "tv.head", nn::layer_norm(p, "tv.lnf", x));
}

}  // namespace dyad::voice
