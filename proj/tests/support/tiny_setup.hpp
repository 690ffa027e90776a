// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Small dialogues and models shared by the training and streaming tests.

#include <vector>

#include "dyad/model_core/model.hpp"
#include "dyad/synth_data/synth.hpp"

namespace dyad::testing {

/// 40-frame dialogues at 10 fps with an 8-token audio vocabulary.
synth::SynthSpec tiny_spec();
std::vector<synth::DyadSample> tiny_dialogues(std::size_t n, std::uint64_t first_seed = 1);
/// d = 16, two layers, window of 12 frames, matching tiny_spec().
model::ModelConfig tiny_config();
model::Vocabulary tiny_vocab(const std::vector<synth::DyadSample>& samples);

}  // namespace dyad::testing
