// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/training/gradcheck.hpp"

#include "dyad/error.hpp"
#include "dyad/model_core/prompt.hpp"
#include "dyad/training/windows.hpp"

namespace dyad::train {

grad::GradCheckReport check_model_gradients(const model::ModelConfig& cfg, const ModelGradCheckOptions& opts) {
  if (opts.frames == 0) throw ConfigError("gradient check needs at least one frame");
  synth::SynthSpec spec;
  spec.frames = 30;
  spec.audio_vocab = cfg.audio_vocab();
  spec.audio_tokens_per_frame = cfg.voice.tokens_per_frame;
  spec.voiceprint_dim = cfg.voice.voiceprint_dim;
  const std::vector<synth::DyadSample> samples{synth::generate_dialogue(opts.seed, spec)};
  const auto& sys = model::default_system_words();

  model::ModelConfig small = cfg;
  small.context_window_frames = opts.frames;
  small.promote_frames = 0;
  small.seed = opts.seed;
  model::Model m(small, build_vocabulary(samples, sys));
  const auto encoded = encode_dialogue(m.vocab(), samples[0]);
  // Start past the first exchange so the history prompt is not empty.
  const std::size_t start = std::min<std::size_t>(15, spec.frames - opts.frames);
  const auto window = make_window(m, encoded, start, sys);

  auto build = [&](grad::Graph& g) {
    nn::Scope p(g, m.params());
    return run_window(p, m, window, LossWeights{}).loss.total;
  };
  grad::GradCheckOptions o;
  o.tolerance = opts.tolerance;
  o.abs_floor = 1e-6;
  // The objective is O(100) (audio weight 100), so the two-point stencil's
  // round-off would dominate small gradients.
  o.stencil = 4;
  o.eps = 1e-3;
  o.max_coords_per_param = opts.coords_per_param;
  o.seed = opts.seed;
  auto params = m.params().all();
  return grad::finite_diff_check(build, params, o);
}

}  // namespace dyad::train
