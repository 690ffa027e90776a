// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/training/losses.hpp"

#include <cmath>

#include "dyad/error.hpp"
#include "dyad/grad/ops.hpp"

namespace dyad::train {

void LossWeights::validate() const {
  if (!(lambda_vision >= 0.0) || !(lambda_audio >= 0.0) || !std::isfinite(lambda_vision) ||
      !std::isfinite(lambda_audio)) {
    throw ConfigError("loss weights must be finite and non-negative");
  }
}

LossTerms compute_losses(Var text_logits, std::span<const std::int32_t> text_targets, Var faces,
                         const Tensor& face_targets, Var audio_logits, std::span<const std::int32_t> audio_targets,
                         const LossWeights& w) {
  w.validate();
  if (text_logits.rows() != text_targets.size()) {
    throw ContractError("text logits have " + std::to_string(text_logits.rows()) + " rows for " +
                        std::to_string(text_targets.size()) + " targets");
  }
  if (faces.rows() != face_targets.rows() || faces.cols() != face_targets.cols()) {
    throw ContractError("predicted faces " + faces.value().shape_str() + " vs targets " + face_targets.shape_str());
  }
  grad::Graph& g = *text_logits.graph;
  LossTerms t;
  t.text = text_targets.empty() ? g.constant(Tensor(1, 1))
                                : grad::scale(grad::cross_entropy(text_logits, text_targets),
                                              static_cast<double>(text_targets.size()));
  t.vision = grad::squared_error_sum(faces, g.constant(face_targets));
  if (audio_targets.empty()) {
    t.audio = g.constant(Tensor(1, 1));
  } else {
    if (!audio_logits.valid() || audio_logits.rows() != audio_targets.size()) {
      throw ContractError("audio logits do not match " + std::to_string(audio_targets.size()) + " audio targets");
    }
    t.audio = grad::cross_entropy(audio_logits, audio_targets);
  }
  t.total = grad::add(grad::add(t.text, grad::scale(t.vision, w.lambda_vision)), grad::scale(t.audio, w.lambda_audio));
  return t;
}

LossValues values_of(const LossTerms& t) {
  return {t.text.value().item(), t.vision.value().item(), t.audio.value().item(), t.total.value().item()};
}

double combine(double text, double vision, double audio, const LossWeights& w) {
  return (text + vision * w.lambda_vision) + audio * w.lambda_audio;
}

}  // namespace dyad::train
