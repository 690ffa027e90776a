// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/model_core/model.hpp"

#include <cmath>

#include "dyad/error.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/tempovoice/tempovoice.hpp"

namespace dyad::model {

using layout::Participant;
using layout::Stream;

namespace {

std::size_t type_index(const layout::TokenTag& t) {
  if (t.is_static()) return 0;
  const std::size_t base = t.stream == Stream::DynVisual ? 1 : 3;
  return base + (t.participant == Participant::Listener ? 1 : 0);
}

std::string layer(const char* prefix, std::size_t i) { return std::string(prefix) + std::to_string(i); }

}  // namespace

void validate_faces(const Tensor& faces, const std::string& what) {
  if (faces.cols() != kFacialDim) {
    throw ValidationError(what + ": facial frames need " + std::to_string(kFacialDim) + " values, got " +
                          std::to_string(faces.cols()));
  }
  for (std::size_t r = 0; r < faces.rows(); ++r) {
    for (std::size_t c = 0; c < kFacialDim; ++c) {
      const double v = faces(r, c);
      if (!std::isfinite(v)) throw ValidationError(what + ": non-finite value at frame " + std::to_string(r));
      if (c < kBlendshapeDim && (v < 0.0 || v > 1.0)) {
        throw ValidationError(what + ": blendshape " + std::to_string(c) + " at frame " + std::to_string(r) +
                              " outside [0, 1]");
      }
    }
  }
}

Model::Model(ModelConfig cfg, Vocabulary vocab) : cfg_(std::move(cfg)), vocab_(std::move(vocab)) {
  cfg_.validate();
  if (vocab_.size() > cfg_.text_vocab) {
    throw ConfigError("vocabulary has " + std::to_string(vocab_.size()) + " entries but text_vocab is " +
                      std::to_string(cfg_.text_vocab));
  }
  init_params();
}

void Model::init_params() {
  const std::size_t d = cfg_.d_model;
  const double sd = cfg_.init_std;
  const std::uint64_t seed = cfg_.seed;
  auto& s = params_;
  s.add("core.tok", grad::normal_tensor(cfg_.text_vocab, d, sd, nn::name_seed(seed, "core.tok")));
  s.add("core.pos", grad::normal_tensor(cfg_.max_positions(), d, sd, nn::name_seed(seed, "core.pos")));
  s.add("core.type", grad::normal_tensor(5, d, sd, nn::name_seed(seed, "core.type")));
  const std::size_t in = 2 * kFacialDim;
  if (cfg_.projector == ProjectorKind::Mlp) {
    nn::add_linear(s, "proj.l1", in, cfg_.projector_hidden, 1.0 / std::sqrt(static_cast<double>(in)), seed);
    nn::add_linear(s, "proj.l2", cfg_.projector_hidden, d, sd, seed);
  } else {
    nn::add_linear(s, "proj.l1", in, d, sd, seed);
  }
  for (std::size_t i = 0; i < cfg_.n_layers; ++i) nn::add_block(s, layer("core.L", i), d, cfg_.mlp_ratio * d, sd, seed);
  nn::add_layer_norm(s, "core.lnf", d);
  nn::add_linear(s, "head.text", d, cfg_.text_vocab, sd, seed);
  for (std::size_t i = 0; i < cfg_.vision_layers; ++i) {
    nn::add_block(s, layer("vdec.L", i), d, cfg_.mlp_ratio * d, sd, seed);
  }
  nn::add_layer_norm(s, "vdec.lnf", d);
  nn::add_linear(s, "vdec.out", d, kFacialDim, sd, seed);
  voice::add_params(s, d, cfg_.voice, cfg_.mlp_ratio, sd, seed);
}

Var Model::vision_project(nn::Scope& p, const Tensor& listener, const Tensor& speaker) const {
  if (listener.rows() != speaker.rows()) {
    throw ContractError("vision_project: " + std::to_string(listener.rows()) + " listener frames vs " +
                        std::to_string(speaker.rows()) + " speaker frames");
  }
  if (listener.cols() != kFacialDim || speaker.cols() != kFacialDim) {
    throw DimensionError("vision_project: facial frames must have 64 values");
  }
  grad::Graph& g = p.graph();
  const std::size_t d = cfg_.d_model;
  if (listener.rows() == 0) return g.constant(Tensor(0, d));
  Var x = grad::concat_cols({g.constant(listener), g.constant(speaker)});
  if (cfg_.projector == ProjectorKind::Linear) return nn::linear(p, "proj.l1", x);
  return nn::linear(p, "proj.l2", grad::gelu(nn::linear(p, "proj.l1", x)));
}

Var Model::forward_tokens(nn::Scope& p, const layout::SequenceLayout& lay, const layout::AttentionMask& mask,
                          const std::vector<std::int32_t>& text_ids, Var visual) const {
  const std::size_t n = lay.size();
  if (mask.size() != n) {
    throw ContractError("mask has " + std::to_string(mask.size()) + " rows for a layout of " + std::to_string(n));
  }
  if (n == 0) throw ContractError("empty layout");
  if (n > cfg_.max_positions()) {
    throw ContractError("layout of " + std::to_string(n) + " tokens exceeds " + std::to_string(cfg_.max_positions()) +
                        " positions");
  }
  std::vector<std::size_t> perm(n);
  std::vector<std::int32_t> types(n);
  std::size_t n_text = 0, n_vis = 0;
  for (const auto& t : lay.tags) {
    if (t.stream == Stream::DynVisual) {
      ++n_vis;
    } else {
      ++n_text;
    }
  }
  if (n_text != text_ids.size()) {
    throw ContractError("layout has " + std::to_string(n_text) + " text slots but " + std::to_string(text_ids.size()) +
                        " ids were given");
  }
  if (n_vis != (visual.valid() ? visual.rows() : 0)) throw ContractError("visual rows do not match visual slots");
  std::size_t ti = 0, vi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = lay.tags[i];
    perm[i] = t.stream == Stream::DynVisual ? n_text + vi++ : ti++;
    types[i] = static_cast<std::int32_t>(type_index(t));
  }
  Var content = grad::embedding(p("core.tok"), text_ids);
  if (n_vis > 0) content = grad::concat_rows({content, visual});
  Var x = grad::gather_rows(content, perm);
  x = grad::add(x, grad::embedding(p("core.type"), types));
  x = grad::add(x, grad::slice_rows(p("core.pos"), 0, n));
  const auto view = mask.view();
  for (std::size_t i = 0; i < cfg_.n_layers; ++i) x = nn::block(p, layer("core.L", i), x, view, cfg_.n_heads);
  return nn::layer_norm(p, "core.lnf", x);
}

Var Model::text_logits(nn::Scope& p, Var rows) const { return nn::linear(p, "head.text", rows); }

Var Model::vision_decode(nn::Scope& p, Var rows) const {
  if (rows.rows() == 0) throw ContractError("vision_decode needs at least one row");
  const auto bits = nn::causal_bits(rows.rows());
  const grad::VisibilityView view{bits.data(), rows.rows(), rows.rows()};
  Var x = rows;
  for (std::size_t i = 0; i < cfg_.vision_layers; ++i) x = nn::block(p, layer("vdec.L", i), x, view, cfg_.n_heads);
  Var out = nn::linear(p, "vdec.out", nn::layer_norm(p, "vdec.lnf", x));
  Var blend = grad::sigmoid(grad::slice_cols(out, 0, kBlendshapeDim));
  return grad::concat_cols({blend, grad::slice_cols(out, kBlendshapeDim, kFacialDim)});
}

ForwardResult Model::forward(nn::Scope& p, const WindowInput& in) const {
  const std::size_t frames = in.frames();
  if (in.listener_ids.size() != frames || in.speaker_faces.rows() != frames || in.listener_faces.rows() != frames) {
    throw ContractError("window streams disagree on frame count");
  }
  if (in.static_ids.empty()) throw ContractError("window needs at least one static token");
  if (in.first_frame < 0) throw ContractError("negative window start");
  if (frames == 0 && in.first_frame != 0) throw ContractError("empty window after frame 0 predicts nothing");
  if (frames > cfg_.context_window_frames) throw ContractError("window longer than context_window_frames");

  ForwardResult r;
  r.layout = layout::build_layout(in.static_ids.size(), frames, cfg_.order, in.first_frame);
  const auto mask = layout::build_omni_mask(r.layout, cfg_.same_time_visible);

  std::vector<std::int32_t> text_ids = in.static_ids;
  std::vector<std::size_t> visual_frame;
  std::vector<std::size_t> h_rows, v_rows;
  for (const auto& t : r.layout.tags) {
    if (t.is_static()) continue;
    const auto f = static_cast<std::size_t>(t.timestamp - in.first_frame);
    const bool listener = t.participant == Participant::Listener;
    if (t.stream == Stream::DynVisual) {
      visual_frame.push_back(f);
      if (listener) v_rows.push_back(t.position);
    } else {
      text_ids.push_back(listener ? in.listener_ids[f] : in.speaker_ids[f]);
      if (listener) h_rows.push_back(t.position);
    }
  }
  Var visual;
  if (frames > 0) visual = grad::gather_rows(vision_project(p, in.listener_faces, in.speaker_faces), visual_frame);
  r.hidden = forward_tokens(p, r.layout, mask, text_ids, visual);
  if (frames > 0) {
    r.text_hidden = grad::gather_rows(r.hidden, h_rows);
    r.visual_hidden = grad::gather_rows(r.hidden, v_rows);
  }

  std::vector<std::size_t> text_pred, vis_pred;
  if (in.first_frame == 0) {
    text_pred.push_back(in.static_ids.size() - 1);
    vis_pred.push_back(in.static_ids.size() - 1);
    r.first_predicted = 0;
  } else {
    r.first_predicted = in.first_frame + 1;
  }
  text_pred.insert(text_pred.end(), h_rows.begin(), h_rows.end());
  vis_pred.insert(vis_pred.end(), v_rows.begin(), v_rows.end());
  r.next_text_logits = text_logits(p, grad::gather_rows(r.hidden, text_pred));
  r.next_faces = vision_decode(p, grad::gather_rows(r.hidden, vis_pred));
  return r;
}

}  // namespace dyad::model
