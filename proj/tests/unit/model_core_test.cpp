// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "dyad/error.hpp"
#include "dyad/grad/gradcheck.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/kv_config.hpp"
#include "dyad/model_core/checkpoint.hpp"
#include "dyad/model_core/model.hpp"
#include "dyad/model_core/prompt.hpp"
#include "dyad/tempovoice/tempovoice.hpp"

namespace dyad::model {
namespace {

using grad::Graph;
using layout::Participant;
using layout::Stream;

Vocabulary toy_vocab() {
  Vocabulary v(default_system_words());
  for (const char* w : {"hello", "there", "yes", "no", "maybe"}) v.add(w);
  return v;
}

ModelConfig small_config(std::size_t d = 16, std::size_t layers = 2) {
  ModelConfig c;
  c.d_model = d;
  c.n_layers = layers;
  c.n_heads = 2;
  c.text_vocab = 32;
  c.mlp_ratio = 2;
  c.projector_hidden = 12;
  c.vision_layers = 2;
  c.context_window_frames = 6;
  c.static_tokens = 14;
  c.voice.audio_vocab = 8;
  c.voice.n_layers = 1;
  c.init_std = 0.3;
  return c;
}

Tensor random_faces(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t(n, kFacialDim);
  for (double& v : t.data()) v = u(rng);
  return t;
}

WindowInput random_window(const Model& m, std::size_t frames, std::int64_t first, std::mt19937_64& rng) {
  WindowInput in;
  History h;
  h.append_word(Participant::Speaker, "hello");
  in.static_ids = render_static(m.vocab(), default_system_words(), h, m.config().static_tokens);
  in.first_frame = first;
  in.speaker_faces = random_faces(frames, rng);
  in.listener_faces = random_faces(frames, rng);
  const auto words = static_cast<std::int32_t>(m.vocab().size());
  for (std::size_t f = 0; f < frames; ++f) {
    in.speaker_ids.push_back(static_cast<std::int32_t>(rng() % 2 == 0 ? Vocabulary::kPause : rng() % words));
    in.listener_ids.push_back(static_cast<std::int32_t>(rng() % 2 == 0 ? Vocabulary::kLasting : rng() % words));
  }
  return in;
}

TEST(VisionProject, ZeroFrames) {
  Model m(small_config(), toy_vocab());
  Graph g;
  nn::Scope p(g, m.params());
  EXPECT_EQ(m.vision_project(p, Tensor(0, 64), Tensor(0, 64)).rows(), 0u);
}

TEST(VisionProject, IdentityLinearProjector) {
  auto cfg = small_config(128, 1);
  cfg.n_heads = 4;
  cfg.projector = ProjectorKind::Linear;
  Model m(cfg, toy_vocab());
  auto& w = m.params().get("proj.l1.w").value;
  w.fill(0.0);
  for (std::size_t i = 0; i < 128; ++i) w(i, i) = 1.0;
  std::mt19937_64 rng(3);
  const Tensor lis = random_faces(5, rng), spk = random_faces(5, rng);
  Graph g;
  nn::Scope p(g, m.params());
  const Tensor& out = m.vision_project(p, lis, spk).value();
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      EXPECT_EQ(out(r, c), lis(r, c));
      EXPECT_EQ(out(r, 64 + c), spk(r, c));
    }
  }
}

TEST(VisionProject, LengthContract) {
  Model m(small_config(), toy_vocab());
  std::mt19937_64 rng(4);
  for (std::size_t n : {1u, 7u, 33u, 64u}) {
    Graph g;
    nn::Scope p(g, m.params());
    EXPECT_EQ(m.vision_project(p, random_faces(n, rng), random_faces(n, rng)).rows(), n);
  }
  Graph g;
  nn::Scope p(g, m.params());
  EXPECT_THROW(m.vision_project(p, random_faces(2, rng), random_faces(3, rng)), ContractError);
}

TEST(Faces, ValidateRange) {
  Tensor ok(2, 64, 0.5);
  EXPECT_NO_THROW(validate_faces(ok, "x"));
  Tensor bad = ok;
  bad(1, 3) = 1.5;
  EXPECT_THROW(validate_faces(bad, "x"), ValidationError);
  Tensor pose = ok;
  pose(0, 60) = -3.0;  // pose values are unrestricted
  EXPECT_NO_THROW(validate_faces(pose, "x"));
  EXPECT_THROW(validate_faces(Tensor(1, 63), "x"), ValidationError);
}

TEST(Forward, ShapesAndPredictionRows) {
  Model m(small_config(), toy_vocab());
  std::mt19937_64 rng(5);
  for (std::int64_t first : {0, 9}) {
    const auto in = random_window(m, 4, first, rng);
    Graph g;
    nn::Scope p(g, m.params());
    const auto r = m.forward(p, in);
    const std::size_t rows = first == 0 ? 5 : 4;
    EXPECT_EQ(r.next_text_logits.rows(), rows);
    EXPECT_EQ(r.next_text_logits.cols(), m.config().text_vocab);
    EXPECT_EQ(r.next_faces.rows(), rows);
    EXPECT_EQ(r.next_faces.cols(), 64u);
    EXPECT_EQ(r.text_hidden.rows(), 4u);
    EXPECT_EQ(r.first_predicted, first == 0 ? 0 : first + 1);
  }
}

TEST(Forward, FutureInputsDoNotLeakBitExact) {
  Model m(small_config(), toy_vocab());
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_window(m, 5, trial % 2 == 0 ? 0 : 3, rng);
    auto b = a;
    const std::size_t cut = 1 + static_cast<std::size_t>(trial % 4);  // frames >= cut differ
    for (std::size_t f = cut; f < 5; ++f) {
      b.speaker_ids[f] = Vocabulary::kUnk;
      b.listener_ids[f] = Vocabulary::kPad;
      for (std::size_t c = 0; c < 64; ++c) {
        b.speaker_faces(f, c) = 0.25;
        b.listener_faces(f, c) = 0.75;
      }
    }
    Graph ga, gb;
    nn::Scope pa(ga, m.params()), pb(gb, m.params());
    const auto ra = m.forward(pa, a);
    const auto rb = m.forward(pb, b);
    const std::int64_t t_cut = a.first_frame + static_cast<std::int64_t>(cut);
    for (std::size_t i = 0; i < ra.layout.size(); ++i) {
      const auto& tag = ra.layout.tags[i];
      if (!tag.is_static() && tag.timestamp >= t_cut) continue;
      for (std::size_t c = 0; c < m.config().d_model; ++c) {
        ASSERT_EQ(ra.hidden.value()(i, c), rb.hidden.value()(i, c)) << "token " << i;
      }
    }
    // Prediction rows for frames <= t_cut come from slots before t_cut.
    const std::size_t keep = static_cast<std::size_t>(t_cut - ra.first_predicted + 1);
    for (std::size_t k = 0; k < keep; ++k) {
      for (std::size_t c = 0; c < 64; ++c) ASSERT_EQ(ra.next_faces.value()(k, c), rb.next_faces.value()(k, c));
      for (std::size_t c = 0; c < m.config().text_vocab; ++c) {
        ASSERT_EQ(ra.next_text_logits.value()(k, c), rb.next_text_logits.value()(k, c));
      }
    }
  }
}

TEST(Forward, StaticTokensIgnoreDynamicInputs) {
  Model m(small_config(), toy_vocab());
  std::mt19937_64 rng(7);
  const auto a = random_window(m, 3, 0, rng);
  const auto b = random_window(m, 3, 0, rng);
  Graph ga, gb;
  nn::Scope pa(ga, m.params()), pb(gb, m.params());
  const auto ra = m.forward(pa, a);
  const auto rb = m.forward(pb, b);
  for (std::size_t i = 0; i < a.static_ids.size(); ++i) {
    for (std::size_t c = 0; c < 16; ++c) ASSERT_EQ(ra.hidden.value()(i, c), rb.hidden.value()(i, c));
  }
}

TEST(Forward, MaskAndLayoutMismatchRejected) {
  Model m(small_config(), toy_vocab());
  Graph g;
  nn::Scope p(g, m.params());
  const auto lay = layout::build_layout(2, 0);
  EXPECT_THROW(m.forward_tokens(p, lay, layout::AttentionMask(3), {8, 9}, grad::Var{}), ContractError);
  EXPECT_THROW(m.forward_tokens(p, lay, layout::build_omni_mask(lay), {8}, grad::Var{}), ContractError);
}

// ---- Long-double reference for one layer, one head. ----

using LD = long double;
using Mat = std::vector<std::vector<LD>>;

Mat to_mat(const Tensor& t) {
  Mat m(t.rows(), std::vector<LD>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t(r, c);
  }
  return m;
}

Mat mm(const Mat& a, const Mat& b) {
  Mat out(a.size(), std::vector<LD>(b[0].size(), 0.0L));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b[0].size(); ++j) {
      for (std::size_t k = 0; k < b.size(); ++k) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

Mat plus_row(Mat a, const Tensor& row) {
  for (auto& r : a) {
    for (std::size_t c = 0; c < r.size(); ++c) r[c] += row[c];
  }
  return a;
}

Mat ln(const Mat& x, const Tensor& g, const Tensor& b) {
  Mat out = x;
  for (std::size_t r = 0; r < x.size(); ++r) {
    LD mu = 0, var = 0;
    for (LD v : x[r]) mu += v;
    mu /= x[r].size();
    for (LD v : x[r]) var += (v - mu) * (v - mu);
    var /= x[r].size();
    for (std::size_t c = 0; c < x[r].size(); ++c) out[r][c] = (x[r][c] - mu) / std::sqrt(var + 1e-5L) * g[c] + b[c];
  }
  return out;
}

TEST(Forward, OneLayerOneHeadMatchesLongDoubleReference) {
  ModelConfig cfg = small_config(4, 1);
  cfg.n_heads = 1;
  cfg.mlp_ratio = 1;
  cfg.static_tokens = 4;
  Model m(cfg, Vocabulary({"a"}));
  // Hand-set weights: a fixed trigonometric pattern per parameter.
  int k = 0;
  for (auto* prm : m.params().all()) {
    ++k;
    for (std::size_t i = 0; i < prm->value.size(); ++i) prm->value[i] = 0.5 * std::sin(0.7 * i + 1.3 * k);
  }
  layout::SequenceLayout lay{{{Stream::Static, Participant::None, layout::kNoTimestamp, 0},
                              {Stream::DynVisual, Participant::Speaker, 0, 1},
                              {Stream::DynText, Participant::Speaker, 0, 2}}};
  const auto mask = layout::build_omni_mask(lay, false);
  const std::vector<std::int32_t> ids{8, 0};
  Tensor vis = Tensor::from_rows({{0.3, -0.2, 0.9, 0.1}});
  Graph g;
  nn::Scope p(g, m.params());
  const Tensor& got = m.forward_tokens(p, lay, mask, ids, g.constant(vis)).value();

  auto P = [&](const std::string& n) -> const Tensor& { return m.params().get(n).value; };
  const Tensor& tok = P("core.tok");
  const Tensor& type = P("core.type");
  const Tensor& pos = P("core.pos");
  Mat x(3, std::vector<LD>(4));
  for (std::size_t c = 0; c < 4; ++c) {
    x[0][c] = (LD)tok(8, c) + type(0, c) + pos(0, c);
    x[1][c] = (LD)vis(0, c) + type(1, c) + pos(1, c);
    x[2][c] = (LD)tok(0, c) + type(3, c) + pos(2, c);
  }
  const std::string L = "core.L0";
  Mat h = ln(x, P(L + ".ln1.g"), P(L + ".ln1.b"));
  Mat q = plus_row(mm(h, to_mat(P(L + ".attn.q.w"))), P(L + ".attn.q.b"));
  Mat kk = mm(h, to_mat(P(L + ".attn.k.w")));
  Mat v = plus_row(mm(h, to_mat(P(L + ".attn.v.w"))), P(L + ".attn.v.b"));
  // Visibility by hand: token 0 sees {0}; 1 sees {0,1}; 2 sees {0,2}.
  const std::vector<std::vector<int>> vis_sets{{0}, {0, 1}, {0, 2}};
  Mat a(3, std::vector<LD>(4, 0.0L));
  for (int i = 0; i < 3; ++i) {
    std::vector<LD> s;
    LD mx = -1e300L;
    for (int j : vis_sets[i]) {
      LD dot = 0;
      for (int c = 0; c < 4; ++c) dot += q[i][c] * kk[j][c];
      s.push_back(dot / 2.0L);
      mx = std::max(mx, s.back());
    }
    LD z = 0;
    for (LD& e : s) z += (e = std::exp(e - mx));
    for (std::size_t t = 0; t < s.size(); ++t) {
      for (int c = 0; c < 4; ++c) a[i][c] += s[t] / z * v[vis_sets[i][t]][c];
    }
  }
  Mat o = plus_row(mm(a, to_mat(P(L + ".attn.o.w"))), P(L + ".attn.o.b"));
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 4; ++c) x[i][c] += o[i][c];
  }
  Mat h2 = ln(x, P(L + ".ln2.g"), P(L + ".ln2.b"));
  Mat f1 = plus_row(mm(h2, to_mat(P(L + ".fc1.w"))), P(L + ".fc1.b"));
  for (auto& r : f1) {
    for (LD& e : r) {
      e = 0.5L * e * (1.0L + std::tanh(std::sqrt(2.0L / 3.14159265358979323846L) * (e + 0.044715L * e * e * e)));
    }
  }
  Mat f2 = plus_row(mm(f1, to_mat(P(L + ".fc2.w"))), P(L + ".fc2.b"));
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 4; ++c) x[i][c] += f2[i][c];
  }
  Mat want = ln(x, P("core.lnf.g"), P("core.lnf.b"));
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(got(i, c), static_cast<double>(want[i][c]), 1e-12) << i << "," << c;
  }
}

TEST(VisionDecode, ShapeAndRange) {
  Model m(small_config(), toy_vocab());
  Graph g;
  nn::Scope p(g, m.params());
  Tensor rows(5, 16);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = (i % 2 == 0 ? 1.0 : -1.0) * 50.0 * (i % 7);
  const Tensor& out = m.vision_decode(p, g.constant(rows)).value();
  ASSERT_EQ(out.cols(), 64u);
  ASSERT_EQ(out.rows(), 5u);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < kBlendshapeDim; ++c) {
      EXPECT_GE(out(r, c), 0.0);
      EXPECT_LE(out(r, c), 1.0);
    }
  }
  EXPECT_THROW(m.vision_decode(p, g.constant(Tensor(0, 16))), ContractError);
}

TEST(VisionDecode, SquaredErrorGradientMatchesFiniteDifferences) {
  Model m(small_config(), toy_vocab());
  std::mt19937_64 rng(8);
  const Tensor rows = grad::normal_tensor(4, 16, 1.0, 17);
  const Tensor target = random_faces(4, rng);
  std::vector<grad::Parameter*> ps;
  for (auto* prm : m.params().all()) {
    if (prm->name.rfind("vdec.", 0) == 0) ps.push_back(prm);
  }
  auto build = [&](Graph& g) {
    nn::Scope p(g, m.params());
    return grad::squared_error_sum(m.vision_decode(p, g.constant(rows)), g.constant(target));
  };
  grad::GradCheckOptions opt;
  opt.tolerance = 1e-4;
  opt.abs_floor = 1e-6;
  const auto rep = grad::finite_diff_check(build, ps, opt);
  EXPECT_TRUE(rep.passed()) << rep.worst << " " << rep.max_rel_error;
}

TEST(FullModel, GradientsMatchFiniteDifferences) {
  Model m(small_config(16, 2), toy_vocab());
  std::mt19937_64 rng(9);
  const auto in = random_window(m, 3, 0, rng);
  const Tensor vp = grad::normal_tensor(1, 16, 1.0, 3);
  auto build = [&](Graph& g) {
    nn::Scope p(g, m.params());
    const auto r = m.forward(p, in);
    std::vector<std::int32_t> text_t{0, 1, 8, 9};
    Tensor face_t(4, 64, 0.3);
    Var audio = voice::forward(p, m.config().voice, m.config().n_heads, r.text_hidden, g.constant(vp), 0);
    std::vector<std::int32_t> audio_t(audio.rows());
    for (std::size_t i = 0; i < audio_t.size(); ++i) audio_t[i] = static_cast<std::int32_t>(i % 8);
    Var l = grad::add(grad::cross_entropy(r.next_text_logits, text_t),
                      grad::squared_error_sum(r.next_faces, g.constant(face_t)));
    return grad::add(l, grad::scale(grad::cross_entropy(audio, audio_t), 100.0));
  };
  grad::GradCheckOptions opt;
  opt.tolerance = 1e-4;
  opt.abs_floor = 1e-6;
  opt.max_coords_per_param = 6;
  const auto params = m.params().all();
  const auto rep = grad::finite_diff_check(build, params, opt);
  EXPECT_TRUE(rep.passed()) << rep.worst << " max rel " << rep.max_rel_error;
  EXPECT_GT(rep.entries.size(), 300u);
}

TEST(Prompt, RenderExactLengthAndTruncation) {
  const Vocabulary v = toy_vocab();
  History h;
  EXPECT_EQ(render_static(v, default_system_words(), h, 14).size(), 14u);
  h.append_word(Participant::Speaker, "hello");
  h.append_word(Participant::Speaker, "there");
  h.append_word(Participant::Listener, "yes");
  const auto ids = render_static(v, default_system_words(), h, 20);
  ASSERT_EQ(ids.size(), 20u);
  // system(12) pad(1) <|user|> hello there <|end|> <|assistant|> yes <|end|>
  const std::vector<std::int32_t> tail{Vocabulary::kUser,  v.id("hello"),      v.id("there"), Vocabulary::kEnd,
                                       Vocabulary::kAssistant, v.id("yes"), Vocabulary::kEnd};
  EXPECT_EQ(std::vector<std::int32_t>(ids.end() - 7, ids.end()), tail);
  EXPECT_EQ(ids[12], Vocabulary::kPad);
  // Budget for 5 history tokens: only the newest turn fits.
  const auto cut = render_static(v, default_system_words(), h, 17);
  const std::vector<std::int32_t> cut_tail{Vocabulary::kAssistant, v.id("yes"), Vocabulary::kEnd};
  EXPECT_EQ(std::vector<std::int32_t>(cut.end() - 3, cut.end()), cut_tail);
  EXPECT_EQ(cut.size(), 17u);
  EXPECT_THROW(render_static(v, default_system_words(), h, 5), ConfigError);
}

TEST(Prompt, HistoryIsAppendOnly) {
  History h;
  h.append_word(Participant::Speaker, "a");
  const History before = h;
  h.append_word(Participant::Speaker, "b");
  h.append_word(Participant::Listener, "c");
  ASSERT_EQ(h.turns().size(), 2u);
  EXPECT_EQ(h.turns()[0].words[0], before.turns()[0].words[0]);
  EXPECT_EQ(h.word_count(), 3u);
}

TEST(Vocab, SpecialsAndRoundTrip) {
  Vocabulary v({"hi"});
  EXPECT_EQ(v.id("[PAUSE]"), Vocabulary::kPause);
  EXPECT_EQ(v.id("[LASTING]"), Vocabulary::kLasting);
  EXPECT_EQ(v.id("hi"), Vocabulary::kFirstWord);
  EXPECT_EQ(v.id("zzz"), Vocabulary::kUnk);
  EXPECT_EQ(v.decode(v.encode(chrono::ChronoToken::word("hi"))), chrono::ChronoToken::word("hi"));
  EXPECT_THROW(v.token(99), IndexError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Model m(small_config(), toy_vocab());
  const auto path = std::filesystem::temp_directory_path() / "dyad_ckpt_test.bin";
  save_checkpoint(path.string(), m);
  const auto loaded = load_checkpoint(path.string());
  EXPECT_EQ(loaded->config().to_kv(), m.config().to_kv());
  EXPECT_EQ(loaded->vocab().words(), m.vocab().words());
  for (const auto* prm : m.params().all()) EXPECT_EQ(loaded->params().get(prm->name).value, prm->value);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(load_checkpoint(path.string()), ValidationError);
  std::filesystem::remove(path);
}

TEST(Config, SetAndValidate) {
  ModelConfig c;
  EXPECT_TRUE(c.set("d_model", "32"));
  EXPECT_TRUE(c.set("audio_tokens_per_frame", "3/2"));
  EXPECT_FALSE(c.set("learning_rate", "1"));
  EXPECT_EQ(c.voice.tokens_per_frame, Rational(3, 2));
  ModelConfig back;
  for (const auto& e : parse_kv(c.to_kv())) ASSERT_TRUE(back.set(e.key, e.value));
  EXPECT_EQ(back.to_kv(), c.to_kv());
  c.n_heads = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(c.set("d_model", "abc"), ConfigError);
}

}  // namespace
}  // namespace dyad::model
