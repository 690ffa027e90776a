// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dyad/error.hpp"
#include "dyad/grad/gradcheck.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/kv_config.hpp"
#include "dyad/model_core/prompt.hpp"
#include "dyad/training/gradcheck.hpp"
#include "dyad/training/trainer.hpp"
#include "tiny_setup.hpp"

namespace dyad::train {
namespace {

using dyad::testing::tiny_config;
using dyad::testing::tiny_dialogues;
using dyad::testing::tiny_vocab;

Tensor filled(std::size_t r, std::size_t c, double v) {
  Tensor t(r, c);
  t.fill(v);
  return t;
}

TEST(Losses, PerfectFacesGiveZeroVision) {
  grad::Graph g;
  const Tensor faces = filled(3, 64, 0.25);
  const std::vector<std::int32_t> text{1, 0, 2}, audio{};
  const auto t = compute_losses(g.constant(filled(3, 5, 0.0)), text, g.constant(faces), faces, {}, audio, {});
  EXPECT_EQ(t.vision.value().item(), 0.0);
  EXPECT_EQ(t.audio.value().item(), 0.0);
}

TEST(Losses, UniformLogits) {
  grad::Graph g;
  const std::vector<std::int32_t> text{1, 0, 2, 4}, audio{0, 63, 7};
  const Tensor faces = filled(4, 64, 0.5);
  const auto t = compute_losses(g.constant(filled(4, 5, 0.0)), text, g.constant(faces), faces,
                                g.constant(filled(3, 64, 1.5)), audio, {});
  EXPECT_NEAR(t.audio.value().item(), std::log(64.0), 1e-12);
  // Text is summed over predicted frames.
  EXPECT_NEAR(t.text.value().item(), 4.0 * std::log(5.0), 1e-12);
}

TEST(Losses, WeightedTotal) {
  LossWeights w;
  EXPECT_EQ(w.lambda_vision, 1.0);
  EXPECT_EQ(w.lambda_audio, 100.0);
  EXPECT_NEAR(combine(1.0, 2.0, 0.01, w), 4.0, 1e-12);
  EXPECT_THROW((LossWeights{-1.0, 1.0}.validate()), ConfigError);
}

TEST(Losses, DoublingAudioWeightAddsAudioTerm) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor tl(6, 9), fp(6, 64), ft(6, 64), al(12, 8);
    for (double& v : tl.data()) v = n01(rng);
    for (double& v : fp.data()) v = n01(rng);
    for (double& v : ft.data()) v = n01(rng);
    for (double& v : al.data()) v = n01(rng);
    std::vector<std::int32_t> text(6), audio(12);
    for (auto& x : text) x = static_cast<std::int32_t>(rng() % 9);
    for (auto& x : audio) x = static_cast<std::int32_t>(rng() % 8);
    grad::Graph g;
    const LossWeights w1{1.0, 100.0}, w2{1.0, 200.0};
    const auto a = values_of(compute_losses(g.constant(tl), text, g.constant(fp), ft, g.constant(al), audio, w1));
    const auto b = values_of(compute_losses(g.constant(tl), text, g.constant(fp), ft, g.constant(al), audio, w2));
    const double expected = a.audio * 100.0;
    EXPECT_NEAR(b.total - a.total, expected, 1e-12 * std::abs(b.total));
    EXPECT_EQ(a.total, combine(a.text, a.vision, a.audio, w1));
  }
}

TEST(Losses, MisalignedInputsRejected) {
  grad::Graph g;
  const std::vector<std::int32_t> text{1, 0}, audio{1};
  const Tensor faces = filled(3, 64, 0.5);
  EXPECT_THROW(compute_losses(g.constant(filled(3, 5, 0.0)), text, g.constant(faces), faces, {}, {}, {}),
               ContractError);
  const std::vector<std::int32_t> text3{1, 0, 2};
  EXPECT_THROW(compute_losses(g.constant(filled(3, 5, 0.0)), text3, g.constant(faces), filled(2, 64, 0.5), {}, {}, {}),
               ContractError);
  EXPECT_THROW(compute_losses(g.constant(filled(3, 5, 0.0)), text3, g.constant(faces), faces,
                              g.constant(filled(2, 8, 0.0)), audio, {}),
               ContractError);
}

TEST(AdamW, MatchesHandRecursionForThreeSteps) {
  grad::ParameterStore store;
  auto& p = store.add("x", filled(1, 1, 0.7));
  const AdamWConfig cfg{0.9, 0.999, 1e-8, 0.01};
  AdamW opt(cfg);
  const double lr = 0.1, g = 0.5;
  long double x = 0.7L, m = 0, v = 0;
  for (int k = 1; k <= 3; ++k) {
    p.grad = filled(1, 1, g);
    opt.step(store.all(), lr);
    m = 0.9L * m + 0.1L * g;
    v = 0.999L * v + 0.001L * g * g;
    const long double mh = m / (1.0L - std::pow(0.9L, k)), vh = v / (1.0L - std::pow(0.999L, k));
    x -= lr * (mh / (std::sqrt(vh) + 1e-8L) + 0.01L * x);
    EXPECT_NEAR(p.value(0, 0), static_cast<double>(x), 1e-15) << "step " << k;
  }
  ASSERT_NE(opt.moments("x"), nullptr);
  EXPECT_EQ(opt.moments("x")->steps, 3u);
}

TEST(AdamW, ZeroGradientZeroDecayLeavesParameters) {
  grad::ParameterStore store;
  auto& p = store.add("x", filled(2, 3, 0.3));
  AdamW opt({0.9, 0.999, 1e-8, 0.0});
  for (int k = 0; k < 4; ++k) {
    p.grad = Tensor(2, 3);
    opt.step(store.all(), 0.5);
  }
  for (double v : p.value.data()) EXPECT_EQ(v, 0.3);
}

TEST(AdamW, FrozenParametersDoNotMove) {
  grad::ParameterStore store;
  auto& a = store.add("tv.w", filled(1, 2, 1.0));
  auto& b = store.add("core.w", filled(1, 2, 1.0));
  store.set_trainable_prefixes({"tv."});
  a.grad = filled(1, 2, 1.0);
  b.grad = filled(1, 2, 1.0);
  AdamW opt;
  opt.step(store.all(), 0.1);
  EXPECT_LT(a.value(0, 0), 1.0);
  EXPECT_EQ(b.value(0, 0), 1.0);
  EXPECT_EQ(opt.moments("core.w"), nullptr);
}

TEST(Schedule, EndpointsAndShape) {
  EXPECT_EQ(lr_schedule(0, 100, 10, 0.5), 0.0);
  EXPECT_EQ(lr_schedule(10, 100, 10, 0.5), 0.5);
  EXPECT_NEAR(lr_schedule(100, 100, 10, 0.5), 0.0, 1e-17);
  EXPECT_NEAR(lr_schedule(55, 100, 10, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(lr_schedule(5, 100, 10, 0.5), 0.25, 1e-15);
  for (std::size_t s = 10; s < 100; ++s) EXPECT_GE(lr_schedule(s, 100, 10, 0.5), lr_schedule(s + 1, 100, 10, 0.5));
  EXPECT_THROW(lr_schedule(101, 100, 10, 0.5), ContractError);
  EXPECT_EQ(lr_schedule(0, 10, 0, 1.0), 1.0);
}

TEST(Clip, RescalesToMaxNorm) {
  grad::ParameterStore store;
  auto& p = store.add("x", Tensor(1, 2));
  p.grad(0, 0) = 3.0;
  p.grad(0, 1) = 4.0;
  EXPECT_EQ(clip_grad_norm(store.all(), 1.0), 5.0);
  EXPECT_NEAR(grad_norm(store.all()), 1.0, 1e-15);
}

TEST(Windows, TargetsAndHistory) {
  const auto data = tiny_dialogues(2);
  model::Model m(tiny_config(), tiny_vocab(data));
  const auto d = encode_dialogue(m.vocab(), data[0]);
  const auto& sys = model::default_system_words();

  const auto w0 = make_window(m, d, 0, sys);
  EXPECT_EQ(w0.first_target_frame, 0);
  EXPECT_EQ(w0.text_targets.size(), 13u);  // static row + 12 frames
  EXPECT_EQ(w0.audio_targets.size(), 24u);
  for (std::size_t i = 0; i < 13; ++i) EXPECT_EQ(w0.text_targets[i], d.listener_ids[i]);

  const std::size_t start = 28;  // last possible window: no target past frame 39
  const auto w = make_window(m, d, start, sys);
  EXPECT_EQ(w.first_target_frame, 29);
  EXPECT_EQ(w.text_targets.size(), 11u);
  EXPECT_EQ(w.face_targets(0, 25), data[0].listener_faces(29, 25));
  EXPECT_EQ(w.audio_targets.front(), data[0].listener_audio[56]);
  EXPECT_EQ(w.input.speaker_ids.front(), d.speaker_ids[start]);

  // History equals the words of frames [0, start), speaker before listener.
  model::History h;
  for (std::size_t f = 0; f < start; ++f) {
    if (d.speaker_tokens[f].is_word()) h.append_word(layout::Participant::Speaker, d.speaker_tokens[f].text);
    if (d.listener_tokens[f].is_word()) h.append_word(layout::Participant::Listener, d.listener_tokens[f].text);
  }
  EXPECT_EQ(w.input.static_ids, model::render_static(m.vocab(), sys, h, 20));
  EXPECT_THROW(make_window(m, d, 29, sys), ContractError);
}

TEST(Windows, RateMismatchRejected) {
  auto spec = dyad::testing::tiny_spec();
  spec.audio_tokens_per_frame = Rational(3, 2);
  std::vector<synth::DyadSample> data{synth::generate_dialogue(1, spec)};
  model::Model m(tiny_config(), tiny_vocab(data));
  const auto d = encode_dialogue(m.vocab(), data[0]);
  EXPECT_THROW(make_window(m, d, 0, model::default_system_words()), ContractError);
}

// Gradient of the weighted total equals the weighted sum of the per-term
// gradients, and all of it matches central differences.
TEST(Objective, FullModelCheckCoversEveryParameter) {
  const auto cfg = dyad::testing::tiny_config();
  const auto rep = check_model_gradients(cfg);
  EXPECT_TRUE(rep.passed()) << rep.worst << " max rel " << rep.max_rel_error;
  std::set<std::string> seen;
  for (const auto& e : rep.entries) seen.insert(e.param);
  model::ModelConfig small = cfg;
  small.context_window_frames = 3;
  const model::Model fresh(small, model::Vocabulary{});
  EXPECT_EQ(seen.size(), fresh.params().all().size());
  EXPECT_THROW(check_model_gradients(cfg, {1e-4, 6, 0, 1}), ConfigError);
}

TEST(Objective, TotalGradientIsWeightedSum) {
  const auto data = tiny_dialogues(1, 5);
  model::Model m(tiny_config(), tiny_vocab(data));
  const auto d = encode_dialogue(m.vocab(), data[0]);
  const auto w = make_window(m, d, 3, model::default_system_words());
  const LossWeights weights{1.0, 100.0};
  auto grads_of = [&](int which) {
    m.params().zero_grad();
    grad::Graph g;
    nn::Scope p(g, m.params());
    const auto run = run_window(p, m, w, weights);
    const grad::Var terms[] = {run.loss.text, run.loss.vision, run.loss.audio, run.loss.total};
    g.backward(terms[which]);
    std::vector<double> out;
    for (const auto* prm : m.params().all()) out.insert(out.end(), prm->grad.data().begin(), prm->grad.data().end());
    return out;
  };
  const auto gt = grads_of(0), gv = grads_of(1), ga = grads_of(2), total = grads_of(3);
  double worst = 0.0;
  for (std::size_t i = 0; i < total.size(); ++i) {
    const double want = gt[i] + 1.0 * gv[i] + 100.0 * ga[i];
    worst = std::max(worst, std::abs(total[i] - want) / std::max(1e-8, std::abs(want)));
  }
  EXPECT_LT(worst, 1e-9);

  grad::GradCheckOptions opts;
  opts.tolerance = 1e-4;
  opts.abs_floor = 1e-6;
  opts.max_coords_per_param = 2;
  auto params = m.params().all();
  const auto report = grad::finite_diff_check(
      [&](grad::Graph& g) {
        nn::Scope p(g, m.params());
        return run_window(p, m, w, weights).loss.total;
      },
      params, opts);
  EXPECT_TRUE(report.passed()) << report.worst << " " << report.max_rel_error;
}

TEST(Trainer, FixedBatchLossDecreasesFor50Steps) {
  const auto data = tiny_dialogues(1, 9);
  model::Model m(tiny_config(), tiny_vocab(data));
  const auto d = encode_dialogue(m.vocab(), data[0]);
  const auto w = make_window(m, d, 0, model::default_system_words());
  AdamW opt;
  double prev = 0.0;
  for (int k = 0; k <= 50; ++k) {
    m.params().zero_grad();
    grad::Graph g;
    nn::Scope p(g, m.params());
    const auto run = run_window(p, m, w, {});
    const double loss = run.loss.total.value().item();
    if (k > 0) {
      EXPECT_LT(loss, prev) << "step " << k;
    }
    prev = loss;
    g.backward(run.loss.total);
    opt.step(m.params().all(), 1e-3);
  }
}

TEST(Trainer, ReproducibleAndPhased) {
  const auto data = tiny_dialogues(3, 20);
  TrainConfig tc;
  tc.unified_steps = 6;
  tc.av_steps = 4;
  tc.warmup_steps = 2;
  tc.batch_size = 2;
  auto train_once = [&](std::vector<LossRecord>* log) {
    auto m = std::make_unique<model::Model>(tiny_config(), tiny_vocab(data));
    Trainer t(*m, tc, model::default_system_words());
    *log = t.run(data);
    return m;
  };
  std::vector<LossRecord> la, lb;
  const auto a = train_once(&la), b = train_once(&lb);
  ASSERT_EQ(la.size(), 10u);
  for (std::size_t i = 0; i < la.size(); ++i) {
    EXPECT_EQ(la[i].loss.total, lb[i].loss.total);
    EXPECT_EQ(la[i].phase, i < 6 ? 1 : 2);
    EXPECT_EQ(la[i].step, i + 1);
  }
  for (std::size_t i = 0; i < a->params().size(); ++i) {
    const auto* pa = a->params().all()[i];
    const auto* pb = b->params().all()[i];
    ASSERT_EQ(pa->name, pb->name);
    for (std::size_t j = 0; j < pa->value.size(); ++j) ASSERT_EQ(pa->value[j], pb->value[j]) << pa->name;
  }
  // Phase 2 leaves the text backbone alone.
  model::Model fresh(tiny_config(), tiny_vocab(data));
  TrainConfig only_av = tc;
  only_av.unified_steps = 0;
  only_av.warmup_steps = 0;
  Trainer t(fresh, only_av, model::default_system_words());
  model::Model reference(tiny_config(), tiny_vocab(data));
  t.run(data);
  EXPECT_EQ(fresh.params().get("core.L0.attn.q.w").value.data()[0],
            reference.params().get("core.L0.attn.q.w").value.data()[0]);
  EXPECT_NE(fresh.params().get("tv.head.w").value.data()[0], reference.params().get("tv.head.w").value.data()[0]);
  for (const auto* p : fresh.params().all()) EXPECT_TRUE(p->trainable);
}

TEST(Trainer, NonFiniteLossAborts) {
  const auto data = tiny_dialogues(1, 30);
  model::Model m(tiny_config(), tiny_vocab(data));
  m.params().get("head.text.b").value(0, 0) = std::numeric_limits<double>::infinity();
  TrainConfig tc;
  tc.unified_steps = 1;
  tc.av_steps = 0;
  tc.warmup_steps = 0;
  Trainer t(m, tc, model::default_system_words());
  EXPECT_THROW(t.run(data), NumericError);
}

TEST(TrainConfig, KeyValueRoundTripAndCsv) {
  TrainConfig c;
  c.learning_rate = 2e-5;
  c.unified_steps = 1500;
  c.av_steps = 500;
  c.warmup_steps = 100;
  TrainConfig back;
  for (const auto& e : parse_kv(c.to_kv(), "test")) ASSERT_TRUE(back.set(e.key, e.value)) << e.key;
  EXPECT_EQ(back.to_kv(), c.to_kv());
  EXPECT_THROW(back.set("optimizer", "sgd"), ConfigError);
  TrainConfig bad;
  bad.warmup_steps = 5000;
  EXPECT_THROW(bad.validate(), ConfigError);

  std::ostringstream os;
  write_csv_header(os);
  write_csv_row(os, {3, 1, 0.5, {1.0, 2.0, 0.01, 4.0}});
  EXPECT_EQ(os.str(), "step,L_text,L_vision,L_audio,L_total,lr,phase\n3,1,2,0.01,4,0.5,1\n");
}

TEST(Evaluation, CountsEveryFrameOnce) {
  const auto data = tiny_dialogues(2, 40);
  model::Model m(tiny_config(), tiny_vocab(data));
  const auto acc = evaluate_teacher_forced(m, data, model::default_system_words());
  EXPECT_EQ(acc.text_total, 80u);
  EXPECT_EQ(acc.audio_total, 160u);
  EXPECT_EQ(acc.vision_frames, 80u);
  EXPECT_LE(acc.text_correct, acc.text_total);
}

}  // namespace
}  // namespace dyad::train
