// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The core network: facial frames of both participants are projected to one
// embedding per frame, interleaved with static prompt tokens and per-frame
// text tokens, and run through a pre-norm transformer under the omni mask.
// Listener slots at frame t predict the listener's text token and facial
// frame at t + 1; the last static token predicts frame 0.

#include <cstdint>
#include <memory>
#include <vector>

#include "dyad/grad/graph.hpp"
#include "dyad/layout_mask/layout.hpp"
#include "dyad/model_core/config.hpp"
#include "dyad/model_core/nn.hpp"
#include "dyad/model_core/vocab.hpp"

namespace dyad::model {

using grad::Tensor;
using grad::Var;

/// Throws ValidationError unless `faces` has 64 finite columns with the 52
/// blendshape columns inside [0, 1].
void validate_faces(const Tensor& faces, const std::string& what);

/// One model window: frames [first_frame, first_frame + frames()).
struct WindowInput {
  std::vector<std::int32_t> static_ids;
  std::int64_t first_frame = 0;
  Tensor speaker_faces;   // frames x 64
  Tensor listener_faces;  // frames x 64
  std::vector<std::int32_t> speaker_ids;
  std::vector<std::int32_t> listener_ids;

  std::size_t frames() const { return speaker_ids.size(); }
};

struct ForwardResult {
  layout::SequenceLayout layout;
  Var hidden;         // n x d, after the final norm
  Var text_hidden;    // frames x d, listener text slots (the H rows)
  Var visual_hidden;  // frames x d, listener visual slots
  /// Frame predicted by row 0 of the prediction heads; row k predicts
  /// first_predicted + k. Equals 0 when the window starts at frame 0 (the
  /// static block predicts frame 0), else first_frame + 1.
  std::int64_t first_predicted = 0;
  Var next_text_logits;  // rows x text_vocab
  Var next_faces;        // rows x 64
};

class Model {
 public:
  Model(ModelConfig cfg, Vocabulary vocab);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  grad::ParameterStore& params() { return params_; }
  const grad::ParameterStore& params() const { return params_; }

  /// One d_model row per frame from [listener | speaker] facial features.
  Var vision_project(nn::Scope& p, const Tensor& listener, const Tensor& speaker) const;

  /// Transformer over an explicit layout. `text_ids` follow the layout's
  /// static and text tags in order; `visual` has one row per visual tag.
  Var forward_tokens(nn::Scope& p, const layout::SequenceLayout& layout, const layout::AttentionMask& mask,
                     const std::vector<std::int32_t>& text_ids, Var visual) const;

  ForwardResult forward(nn::Scope& p, const WindowInput& in) const;

  /// Two-layer causal transformer decoder mapping predictor rows to facial
  /// frames; blendshapes pass through a logistic map, pose stays linear.
  Var vision_decode(nn::Scope& p, Var rows) const;

  Var text_logits(nn::Scope& p, Var rows) const;

 private:
  void init_params();

  ModelConfig cfg_;
  Vocabulary vocab_;
  grad::ParameterStore params_;
};

}  // namespace dyad::model
