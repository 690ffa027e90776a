// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/training/trainer.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "dyad/error.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/kv_config.hpp"
#include "dyad/tempovoice/tempovoice.hpp"

namespace dyad::train {

const std::vector<std::string>& av_prefixes() {
  static const std::vector<std::string> p{"proj.", "vdec.", "tv."};
  return p;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (total_steps() == 0) fail("at least one training step is required");
  if (warmup_steps > total_steps()) fail("warmup_steps exceeds the total step count");
  if (!(grad_clip >= 0.0)) fail("grad_clip must be non-negative");
  weights().validate();
  adamw().validate();
}

bool TrainConfig::set(std::string_view key, std::string_view value) {
  if (key == "learning_rate") {
    learning_rate = kv_double(key, value);
  } else if (key == "warmup_steps") {
    warmup_steps = kv_size(key, value);
  } else if (key == "beta1") {
    beta1 = kv_double(key, value);
  } else if (key == "beta2") {
    beta2 = kv_double(key, value);
  } else if (key == "adam_eps") {
    adam_eps = kv_double(key, value);
  } else if (key == "weight_decay") {
    weight_decay = kv_double(key, value);
  } else if (key == "lambda_vision") {
    lambda_vision = kv_double(key, value);
  } else if (key == "lambda_audio") {
    lambda_audio = kv_double(key, value);
  } else if (key == "batch_size") {
    batch_size = kv_size(key, value);
  } else if (key == "unified_steps") {
    unified_steps = kv_size(key, value);
  } else if (key == "av_steps") {
    av_steps = kv_size(key, value);
  } else if (key == "grad_clip") {
    grad_clip = kv_double(key, value);
  } else if (key == "train_seed") {
    seed = kv_u64(key, value);
  } else if (key == "optimizer") {
    if (value != "adamw") throw ConfigError("only the adamw optimizer is available");
  } else {
    return false;
  }
  return true;
}

std::string TrainConfig::to_kv() const {
  std::ostringstream os;
  os.precision(17);
  os << "optimizer=adamw\nlearning_rate=" << learning_rate << "\nwarmup_steps=" << warmup_steps << "\nbeta1=" << beta1
     << "\nbeta2=" << beta2 << "\nadam_eps=" << adam_eps << "\nweight_decay=" << weight_decay
     << "\nlambda_vision=" << lambda_vision << "\nlambda_audio=" << lambda_audio << "\nbatch_size=" << batch_size
     << "\nunified_steps=" << unified_steps << "\nav_steps=" << av_steps << "\ngrad_clip=" << grad_clip
     << "\ntrain_seed=" << seed << "\n";
  return os.str();
}

void write_csv_header(std::ostream& out) { out << "step,L_text,L_vision,L_audio,L_total,lr,phase\n"; }

void write_csv_row(std::ostream& out, const LossRecord& r) {
  const auto old = out.precision(10);
  out << r.step << ',' << r.loss.text << ',' << r.loss.vision << ',' << r.loss.audio << ',' << r.loss.total << ','
      << r.lr << ',' << r.phase << '\n';
  out.precision(old);
}

Trainer::Trainer(model::Model& model, TrainConfig cfg, std::vector<std::string> system_words)
    : model_(model), cfg_(cfg), system_words_(std::move(system_words)), opt_(cfg.adamw()), rng_(cfg.seed) {
  cfg_.validate();
}

LossValues Trainer::probe(const std::vector<synth::DyadSample>& samples) {
  LossValues acc;
  for (const auto& s : samples) {
    const auto d = encode_dialogue(model_.vocab(), s);
    const auto w = make_window(model_, d, 0, system_words_);
    grad::Graph g;
    nn::Scope p(g, model_.params());
    const auto v = values_of(run_window(p, model_, w, cfg_.weights()).loss);
    acc.text += v.text;
    acc.vision += v.vision;
    acc.audio += v.audio;
    acc.total += v.total;
  }
  return acc;
}

LossRecord Trainer::step(const std::vector<EncodedDialogue>& data, std::size_t step) {
  if (data.empty()) throw ContractError("training needs at least one dialogue");
  LossRecord rec;
  rec.step = step;
  rec.phase = step <= cfg_.unified_steps ? 1 : 2;
  rec.lr = lr_schedule(step, cfg_.total_steps(), cfg_.warmup_steps, cfg_.learning_rate);
  auto params = model_.params().all();
  model_.params().zero_grad();
  for (std::size_t b = 0; b < cfg_.batch_size; ++b) {
    const EncodedDialogue& d = data[static_cast<std::size_t>(rng_() % data.size())];
    const std::size_t W = window_length(model_.config(), *d.sample);
    const std::size_t start = static_cast<std::size_t>(rng_() % (d.sample->frames - W + 1));
    const auto w = make_window(model_, d, start, system_words_);
    grad::Graph g;
    nn::Scope p(g, model_.params());
    auto run = run_window(p, model_, w, cfg_.weights());
    Var loss = run.loss.total;
    if (cfg_.batch_size > 1) loss = grad::scale(loss, 1.0 / static_cast<double>(cfg_.batch_size));
    const LossValues v = values_of(run.loss);
    if (!std::isfinite(v.total)) {
      std::ostringstream os;
      os << "non-finite loss at step " << step << " (phase " << rec.phase << ", dialogue '" << d.sample->id
         << "', window start " << start << "): L_text=" << v.text << " L_vision=" << v.vision
         << " L_audio=" << v.audio;
      throw NumericError(os.str());
    }
    g.backward(loss);
    const double inv = 1.0 / static_cast<double>(cfg_.batch_size);
    rec.loss.text += v.text * inv;
    rec.loss.vision += v.vision * inv;
    rec.loss.audio += v.audio * inv;
    rec.loss.total += v.total * inv;
  }
  if (cfg_.grad_clip > 0.0) clip_grad_norm(params, cfg_.grad_clip);
  opt_.step(params, rec.lr);
  return rec;
}

std::vector<LossRecord> Trainer::run(const std::vector<synth::DyadSample>& samples,
                                     const std::function<void(const LossRecord&)>& on_step) {
  std::vector<EncodedDialogue> data;
  data.reserve(samples.size());
  for (const auto& s : samples) data.push_back(encode_dialogue(model_.vocab(), s));
  std::vector<LossRecord> log;
  auto& store = model_.params();
  store.set_all_trainable(true);
  for (std::size_t k = 1; k <= cfg_.total_steps(); ++k) {
    if (k == cfg_.unified_steps + 1) store.set_trainable_prefixes(av_prefixes());
    log.push_back(step(data, k));
    if (on_step) on_step(log.back());
  }
  store.set_all_trainable(true);
  return log;
}

Accuracy evaluate_teacher_forced(model::Model& model, const std::vector<synth::DyadSample>& samples,
                                 const std::vector<std::string>& system_words) {
  Accuracy acc;
  const auto& cfg = model.config();
  const Rational r = cfg.voice.tokens_per_frame;
  for (const auto& s : samples) {
    const auto d = encode_dialogue(model.vocab(), s);
    const std::size_t W = window_length(cfg, s);
    std::int64_t next_text = 0;  // first frame whose text target is not yet counted
    std::int64_t next_audio = 0;
    for (std::size_t k = 0;; ++k) {
      const std::size_t start = std::min(k * W, s.frames - W);
      const auto w = make_window(model, d, start, system_words);
      grad::Graph g;
      nn::Scope p(g, model.params());
      const auto run = run_window(p, model, w, {});
      const auto text_pred = grad::argmax_rows(run.text_logits.value());
      const Tensor& faces = run.faces.value();
      for (std::size_t i = 0; i < text_pred.size(); ++i) {
        const std::int64_t frame = w.first_target_frame + static_cast<std::int64_t>(i);
        if (frame < next_text) continue;
        ++acc.text_total;
        const bool ok = text_pred[i] == w.text_targets[i];
        acc.text_correct += ok;
        if (d.listener_tokens[static_cast<std::size_t>(frame)].is_word()) {
          ++acc.word_total;
          acc.word_correct += ok;
        }
        for (std::size_t c = 0; c < model::kFacialDim; ++c) {
          const double e = faces(i, c) - w.face_targets(i, c);
          acc.vision_sse += e * e;
        }
        ++acc.vision_frames;
        next_text = frame + 1;
      }
      const auto audio_pred = grad::argmax_rows(run.audio_logits.value());
      const std::int64_t mu0 = voice::first_token(static_cast<std::int64_t>(start), r);
      for (std::size_t i = 0; i < audio_pred.size(); ++i) {
        const std::int64_t mu = mu0 + static_cast<std::int64_t>(i);
        if (mu < next_audio) continue;
        ++acc.audio_total;
        acc.audio_correct += audio_pred[i] == w.audio_targets[i];
        next_audio = mu + 1;
      }
      if (start + W >= s.frames) break;
    }
  }
  return acc;
}

}  // namespace dyad::train
