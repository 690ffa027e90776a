// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Training objective: L = L_text + lambda_vision * L_vision + lambda_audio * L_audio.
//   L_text   summed cross-entropy over predicted listener text tokens
//   L_vision summed squared error over predicted listener facial frames
//   L_audio  mean cross-entropy over listener audio tokens

#include <cstdint>
#include <span>

#include "dyad/grad/graph.hpp"

namespace dyad::train {

using grad::Tensor;
using grad::Var;

struct LossWeights {
  double lambda_vision = 1.0;
  double lambda_audio = 100.0;
  void validate() const;
};

struct LossTerms {
  Var text, vision, audio, total;
};

struct LossValues {
  double text = 0, vision = 0, audio = 0, total = 0;
};

/// Row counts must agree between predictions and targets (ContractError).
/// Empty audio targets give an L_audio of exactly zero.
LossTerms compute_losses(Var text_logits, std::span<const std::int32_t> text_targets, Var faces, const Tensor& face_targets,
                         Var audio_logits, std::span<const std::int32_t> audio_targets, const LossWeights& w);

LossValues values_of(const LossTerms& t);

/// text + lambda_vision * vision + lambda_audio * audio, evaluated in the same
/// order as compute_losses().
double combine(double text, double vision, double audio, const LossWeights& w);

}  // namespace dyad::train
