// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/model_core/stream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dyad/error.hpp"
#include "dyad/grad/ops.hpp"

namespace dyad::model {

std::vector<std::int32_t> allowed_listener_ids(const Vocabulary& vocab, const chrono::ChronoToken* previous) {
  const bool word_open = previous != nullptr && !previous->is_pause();
  std::vector<std::int32_t> ids;
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(vocab.size()); ++id) {
    if (Vocabulary::is_special(id)) continue;
    if (id == Vocabulary::kLasting && !word_open) continue;
    ids.push_back(id);
  }
  return ids;
}

std::int32_t choose_token(std::span<const double> logits, const std::vector<std::int32_t>& allowed, double temperature,
                          std::mt19937_64& rng) {
  if (allowed.empty()) throw ContractError("no token is allowed");
  for (auto id : allowed) {
    if (id < 0 || static_cast<std::size_t>(id) >= logits.size()) throw IndexError("allowed id outside the logits");
  }
  if (!(temperature > 0.0)) {
    std::int32_t best = allowed.front();
    for (auto id : allowed) {
      if (logits[static_cast<std::size_t>(id)] > logits[static_cast<std::size_t>(best)]) best = id;
    }
    return best;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (auto id : allowed) top = std::max(top, logits[static_cast<std::size_t>(id)] / temperature);
  std::vector<double> w(allowed.size());
  double total = 0.0;
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    w[i] = std::exp(logits[static_cast<std::size_t>(allowed[i])] / temperature - top);
    total += w[i];
  }
  // 53 random bits, independent of the standard library's distributions.
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    if (u < w[i]) return allowed[i];
    u -= w[i];
  }
  return allowed.back();
}

StreamState::StreamState(const Model& model, std::vector<std::string> system_words, DecodeOptions decode)
    : model_(model), system_words_(std::move(system_words)), decode_(decode), rng_(decode.seed) {
  if (!(decode.temperature >= 0.0) || !std::isfinite(decode.temperature)) {
    throw ConfigError("temperature must be finite and non-negative");
  }
  render_static(model_.vocab(), system_words_, history_, model_.config().static_tokens);
}

void StreamState::promote(std::size_t count) {
  if (count > window_frames()) {
    throw ContractError("cannot promote " + std::to_string(count) + " of " + std::to_string(window_frames()) +
                        " frames");
  }
  if (count == 0) return;
  for (std::size_t f = 0; f < count; ++f) append_frame(history_, speaker_tokens_[f], listener_tokens_[f]);
  auto drop = [count](auto& v) { v.erase(v.begin(), v.begin() + static_cast<long>(count)); };
  drop(speaker_faces_);
  drop(listener_faces_);
  drop(speaker_tokens_);
  drop(listener_tokens_);
  drop(speaker_ids_);
  drop(listener_ids_);
  start_ += static_cast<std::int64_t>(count);
}

std::size_t promote_history(StreamState& state) {
  const auto& cfg = state.model().config();
  if (state.window_frames() < cfg.context_window_frames) return 0;
  const std::size_t n = cfg.promote_count();
  state.promote(n);
  return n;
}

struct StepAccess {
  // Runs the model on the current window and caches the next-frame prediction.
  static void refresh(StreamState& s) {
    const Model& m = s.model_;
    WindowInput in;
    in.static_ids = render_static(m.vocab(), s.system_words_, s.history_, m.config().static_tokens);
    in.first_frame = s.start_;
    const std::size_t n = s.window_frames();
    in.speaker_faces = Tensor(n, kFacialDim);
    in.listener_faces = Tensor(n, kFacialDim);
    for (std::size_t f = 0; f < n; ++f) {
      for (std::size_t c = 0; c < kFacialDim; ++c) {
        in.speaker_faces(f, c) = s.speaker_faces_[f][c];
        in.listener_faces(f, c) = s.listener_faces_[f][c];
      }
    }
    in.speaker_ids = s.speaker_ids_;
    in.listener_ids = s.listener_ids_;
    grad::Graph g;
    // Inference only binds parameter values; no backward pass touches them.
    nn::Scope p(g, const_cast<grad::ParameterStore&>(m.params()));
    const ForwardResult r = m.forward(p, in);
    const Tensor& logits = r.next_text_logits.value();
    const Tensor& faces = r.next_faces.value();
    const std::size_t last = logits.rows() - 1;
    s.next_logits_.assign(logits.row(last).begin(), logits.row(last).end());
    s.next_face_.assign(faces.row(last).begin(), faces.row(last).end());
    s.text_hidden_ = n > 0 ? r.text_hidden.value() : Tensor(0, m.config().d_model);
    s.have_prediction_ = true;
  }

  static StepOutput step(StreamState& s, std::span<const double> speaker_face, const chrono::ChronoToken& speaker_token) {
    if (speaker_face.size() != kFacialDim) {
      throw DimensionError("speaker frame has " + std::to_string(speaker_face.size()) + " values, expected 64");
    }
    if (!s.have_prediction_) refresh(s);
    const Model& m = s.model_;
    StepOutput out;
    out.frame = s.next_frame();
    const auto allowed = allowed_listener_ids(m.vocab(), s.have_last_listener_ ? &s.last_listener_ : nullptr);
    out.token_id = choose_token(s.next_logits_, allowed, s.decode_.temperature, s.rng_);
    out.token = m.vocab().decode(out.token_id);
    out.face = s.next_face_;

    promote_history(s);
    s.speaker_faces_.emplace_back(speaker_face.begin(), speaker_face.end());
    s.listener_faces_.push_back(out.face);
    s.speaker_tokens_.push_back(speaker_token);
    s.listener_tokens_.push_back(out.token);
    s.speaker_ids_.push_back(m.vocab().encode(speaker_token));
    s.listener_ids_.push_back(out.token_id);
    s.last_listener_ = out.token;
    s.have_last_listener_ = true;

    refresh(s);
    const std::size_t h = s.text_hidden_.rows() - 1;
    out.hidden.assign(s.text_hidden_.row(h).begin(), s.text_hidden_.row(h).end());
    return out;
  }
};

StepOutput generate_step(StreamState& state, std::span<const double> speaker_face,
                         const chrono::ChronoToken& speaker_token) {
  return StepAccess::step(state, speaker_face, speaker_token);
}

}  // namespace dyad::model
