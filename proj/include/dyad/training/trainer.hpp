// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Two-phase training: a unified phase updating every parameter, then an
// audio/visual fine-tune updating only the vision projector, the vision
// decoder and the audio head. One cosine schedule spans both phases.

#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dyad/model_core/model.hpp"
#include "dyad/synth_data/synth.hpp"
#include "dyad/training/losses.hpp"
#include "dyad/training/optimizer.hpp"
#include "dyad/training/windows.hpp"

namespace dyad::train {

/// Prefixes of the parameters trained in the audio/visual phase.
const std::vector<std::string>& av_prefixes();

struct TrainConfig {
  double learning_rate = 3e-3;
  std::size_t warmup_steps = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 1e-4;
  double lambda_vision = 1.0;
  double lambda_audio = 100.0;
  std::size_t batch_size = 1;  // windows accumulated per update
  std::size_t unified_steps = 1500;
  std::size_t av_steps = 500;
  double grad_clip = 0.0;  // 0 disables clipping
  std::uint64_t seed = 1;

  std::size_t total_steps() const { return unified_steps + av_steps; }
  LossWeights weights() const { return {lambda_vision, lambda_audio}; }
  AdamWConfig adamw() const { return {beta1, beta2, adam_eps, weight_decay}; }
  void validate() const;
  bool set(std::string_view key, std::string_view value);
  std::string to_kv() const;
};

struct LossRecord {
  std::size_t step = 0;  // 1-based update index
  int phase = 1;         // 1 unified, 2 audio/visual
  double lr = 0;
  LossValues loss;
};

/// CSV header and row: step,L_text,L_vision,L_audio,L_total,lr,phase
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const LossRecord& r);

class Trainer {
 public:
  Trainer(model::Model& model, TrainConfig cfg, std::vector<std::string> system_words);

  /// Loss of the fixed first window of every dialogue, no update.
  LossValues probe(const std::vector<synth::DyadSample>& samples);

  /// One update at 1-based index `step` on freshly drawn windows.
  LossRecord step(const std::vector<EncodedDialogue>& data, std::size_t step);

  /// Runs both phases. `on_step` sees every record (may be empty).
  std::vector<LossRecord> run(const std::vector<synth::DyadSample>& samples,
                              const std::function<void(const LossRecord&)>& on_step = {});

  const AdamW& optimizer() const { return opt_; }

 private:
  model::Model& model_;
  TrainConfig cfg_;
  std::vector<std::string> system_words_;
  AdamW opt_;
  std::mt19937_64 rng_;
};

struct Accuracy {
  std::size_t text_total = 0, text_correct = 0;
  std::size_t word_total = 0, word_correct = 0;  // frames whose target is a Word
  std::size_t audio_total = 0, audio_correct = 0;
  double vision_sse = 0.0;
  std::size_t vision_frames = 0;

  double text() const { return text_total ? static_cast<double>(text_correct) / static_cast<double>(text_total) : 0.0; }
  double word() const { return word_total ? static_cast<double>(word_correct) / static_cast<double>(word_total) : 0.0; }
  double audio() const {
    return audio_total ? static_cast<double>(audio_correct) / static_cast<double>(audio_total) : 0.0;
  }
};

/// Teacher-forced next-token accuracy over every listener frame and audio
/// token. Windows tile each dialogue (the last one is moved back to fit) and
/// each target is counted once.
Accuracy evaluate_teacher_forced(model::Model& model, const std::vector<synth::DyadSample>& samples,
                                 const std::vector<std::string>& system_words);

}  // namespace dyad::train
