// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "dyad/grad/gradcheck.hpp"
#include "dyad/model_core/config.hpp"

namespace dyad::train {

struct ModelGradCheckOptions {
  double tolerance = 1e-4;
  std::size_t coords_per_param = 6;
  /// Window length used for the check; the model is rebuilt with it.
  std::size_t frames = 3;
  std::uint64_t seed = 1;
};

/// Central differences of the full training objective (text, vision and
/// audio terms at the default weights) on one synthetic window, sampled over
/// every parameter of a freshly initialized model with `cfg`.
grad::GradCheckReport check_model_gradients(const model::ModelConfig& cfg, const ModelGradCheckOptions& opts = {});

}  // namespace dyad::train
