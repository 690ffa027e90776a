// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Audio head. Each audio token slot starts as a zero vector plus a
// sinusoidal position and acts as a query; a small transformer decoder with
// causal self-attention among slots and cross-attention over
// [voiceprint, listener text hidden states] produces audio-token logits.
//
// With r audio tokens per frame, token mu belongs to frame floor(mu / r) and
// frame t owns tokens ceil(t r) .. ceil((t+1) r) - 1.

#include <cstdint>
#include <vector>

#include "dyad/model_core/nn.hpp"
#include "dyad/tempovoice/config.hpp"

namespace dyad::voice {

using grad::Tensor;
using grad::Var;

/// ceil(frames * r).
std::int64_t token_count(std::int64_t frames, Rational r);
/// First token owned by `frame`: ceil(frame * r).
std::int64_t first_token(std::int64_t frame, Rational r);
/// floor(mu / r).
std::int64_t owner_frame(std::int64_t mu, Rational r);
/// Tokens owned by one frame.
std::int64_t tokens_in_frame(std::int64_t frame, Rational r);

/// Placeholder queries for the tokens of frames [0, n_frames): zero vectors
/// plus the sinusoidal encoding of each token index.
Tensor make_placeholders(std::size_t n_frames, const TempoVoiceConfig& cfg, std::size_t d);

void add_params(grad::ParameterStore& s, std::size_t d, const TempoVoiceConfig& cfg, std::size_t mlp_ratio,
                double stddev, std::uint64_t seed);

/// Projects a raw voiceprint (cfg.voiceprint_dim values) to a 1 x d row.
Var embed_voiceprint(nn::Scope& p, const TempoVoiceConfig& cfg, const std::vector<double>& voiceprint);

/// Logits for every token owned by frames [first_frame, first_frame + rows
/// of H). `h` holds one hidden row per frame, `voiceprint` is 1 x d.
/// Positions are relative to the window start, so a window produces the
/// same result wherever it sits in the conversation.
Var forward(nn::Scope& p, const TempoVoiceConfig& cfg, std::size_t n_heads, Var h, Var voiceprint,
            std::int64_t first_frame);

/// Same as forward() with caller-supplied queries (one row per token).
Var forward_queries(nn::Scope& p, const TempoVoiceConfig& cfg, std::size_t n_heads, Var queries, Var h,
                    Var voiceprint, std::int64_t first_frame);

/// Cross-attention visibility (tokens x (1 + frames)) for the memory mode.
std::vector<std::uint8_t> cross_mask_bits(const TempoVoiceConfig& cfg, std::int64_t first_frame, std::size_t frames);

}  // namespace dyad::voice
