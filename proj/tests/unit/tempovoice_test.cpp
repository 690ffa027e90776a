// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "dft_oracle.hpp"
#include "dyad/error.hpp"
#include "dyad/grad/gradcheck.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/tempovoice/codec.hpp"
#include "dyad/tempovoice/tempovoice.hpp"

namespace dyad::voice {
namespace {

using grad::Graph;

struct Fixture {
  std::size_t d = 8;
  TempoVoiceConfig cfg;
  grad::ParameterStore store;
  explicit Fixture(MemoryMode mode = MemoryMode::Causal, Rational r = Rational(2)) {
    cfg.tokens_per_frame = r;
    cfg.n_layers = 2;
    cfg.audio_vocab = 6;
    cfg.memory = mode;
    add_params(store, d, cfg, 2, 0.4, 11);
  }
  Tensor run(const Tensor& h, const Tensor& vp, std::int64_t first = 0, const Tensor* queries = nullptr) {
    Graph g;
    nn::Scope p(g, store);
    if (queries != nullptr) {
      return forward_queries(p, cfg, 2, g.constant(*queries), g.constant(h), g.constant(vp), first).value();
    }
    return forward(p, cfg, 2, g.constant(h), g.constant(vp), first).value();
  }
};

TEST(Placeholders, CountsAndZeroInit) {
  TempoVoiceConfig cfg;
  EXPECT_EQ(make_placeholders(0, cfg, 8).rows(), 0u);
  EXPECT_EQ(make_placeholders(4, cfg, 8).rows(), 8u);
  const Tensor q = make_placeholders(3, cfg, 8);
  const double zero = 0.0;
  const Tensor pe0 = nn::sinusoidal(std::span<const double>(&zero, 1), 8);
  for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(q(0, c), pe0(0, c));
  EXPECT_EQ(q(0, 0), 0.0);  // sin(0)
  EXPECT_EQ(q(0, 1), 1.0);  // cos(0)
  cfg.tokens_per_frame = Rational(3, 2);
  EXPECT_EQ(make_placeholders(3, cfg, 8).rows(), 5u);  // ceil(4.5)
}

TEST(Ownership, MatchesAccumulationOracle) {
  for (const Rational r : {Rational(1), Rational(2), Rational(3, 2), Rational(5, 3), Rational(2, 5)}) {
    for (std::int64_t frames = 0; frames < 40; ++frames) {
      const auto owners = testing::owners_by_accumulation(frames, r);
      ASSERT_EQ(static_cast<std::int64_t>(owners.size()), token_count(frames, r)) << r.str() << " " << frames;
      for (std::size_t mu = 0; mu < owners.size(); ++mu) {
        EXPECT_EQ(owner_frame(static_cast<std::int64_t>(mu), r), owners[mu]);
      }
      std::int64_t sum = 0;
      for (std::int64_t f = 0; f < frames; ++f) sum += tokens_in_frame(f, r);
      EXPECT_EQ(sum, token_count(frames, r));
    }
  }
}

TEST(Forward, LogitShape) {
  Fixture fx(MemoryMode::Causal, Rational(3, 2));
  const Tensor h = grad::normal_tensor(5, 8, 1.0, 1);
  const Tensor vp = grad::normal_tensor(1, 8, 1.0, 2);
  const Tensor out = fx.run(h, vp);
  EXPECT_EQ(out.rows(), 8u);  // ceil(7.5)
  EXPECT_EQ(out.cols(), 6u);
  // Window starting at frame 3 owns tokens ceil(4.5)=5 .. ceil(12)=12.
  EXPECT_EQ(fx.run(h, vp, 3).rows(), 7u);
}

TEST(Forward, MemoryPerturbationReachesEverySlotInWindowMode) {
  Fixture fx(MemoryMode::Window);
  const Tensor h = grad::normal_tensor(4, 8, 1.0, 1);
  const Tensor vp = grad::normal_tensor(1, 8, 1.0, 2);
  Tensor h2 = h;
  h2(3, 5) += 0.5;
  const Tensor a = fx.run(h, vp), b = fx.run(h2, vp);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    bool changed = false;
    for (std::size_t c = 0; c < a.cols(); ++c) changed |= a(r, c) != b(r, c);
    EXPECT_TRUE(changed) << "slot " << r;
  }
}

TEST(Forward, CausalModeHidesLaterFrames) {
  Fixture fx(MemoryMode::Causal);
  const Tensor h = grad::normal_tensor(4, 8, 1.0, 1);
  const Tensor vp = grad::normal_tensor(1, 8, 1.0, 2);
  Tensor h2 = h;
  for (std::size_t c = 0; c < 8; ++c) h2(2, c) = -h2(2, c);
  const Tensor a = fx.run(h, vp), b = fx.run(h2, vp);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    bool changed = false;
    for (std::size_t c = 0; c < a.cols(); ++c) changed |= a(r, c) != b(r, c);
    EXPECT_EQ(changed, r >= 4) << "slot " << r;  // frame 2 owns slots 4, 5
  }
}

TEST(Forward, PlaceholderPerturbationOnlyAffectsLaterSlots) {
  Fixture fx(MemoryMode::Window);
  const Tensor h = grad::normal_tensor(3, 8, 1.0, 1);
  const Tensor vp = grad::normal_tensor(1, 8, 1.0, 2);
  const Tensor q = make_placeholders(3, fx.cfg, 8);
  const Tensor base = fx.run(h, vp, 0, &q);
  EXPECT_EQ(base, fx.run(h, vp));
  for (std::size_t j = 0; j < q.rows(); ++j) {
    Tensor q2 = q;
    q2(j, 0) += 0.3;
    const Tensor out = fx.run(h, vp, 0, &q2);
    for (std::size_t r = 0; r < out.rows(); ++r) {
      bool changed = false;
      for (std::size_t c = 0; c < out.cols(); ++c) changed |= out(r, c) != base(r, c);
      EXPECT_EQ(changed, r >= j) << "perturbed " << j << " slot " << r;
    }
  }
}

TEST(Forward, VoiceprintSensitivity) {
  Fixture fx;
  const Tensor h = grad::normal_tensor(3, 8, 1.0, 1);
  EXPECT_NE(fx.run(h, grad::normal_tensor(1, 8, 1.0, 2)), fx.run(h, grad::normal_tensor(1, 8, 1.0, 3)));
}

TEST(Forward, LastFramesMask) {
  TempoVoiceConfig cfg;
  cfg.memory = MemoryMode::LastFrames;
  cfg.last_k = 2;
  const auto bits = cross_mask_bits(cfg, 0, 4);
  // Token 6 belongs to frame 3: sees the voiceprint and frames 2, 3.
  const std::vector<std::uint8_t> row6(bits.begin() + 6 * 5, bits.begin() + 7 * 5);
  EXPECT_EQ(row6, (std::vector<std::uint8_t>{1, 0, 0, 1, 1}));
}

TEST(Forward, DimensionMismatchRejected) {
  Fixture fx;
  EXPECT_THROW(fx.run(Tensor(2, 8), Tensor(1, 7)), ContractError);
  EXPECT_THROW(fx.run(Tensor(0, 8), Tensor(1, 8)), ContractError);
}

TEST(Forward, GradientsMatchFiniteDifferences) {
  Fixture fx(MemoryMode::Causal, Rational(3, 2));
  const Tensor h0 = grad::normal_tensor(3, 8, 1.0, 5);
  const Tensor vp = grad::normal_tensor(1, 8, 1.0, 6);
  grad::Parameter hp{"h", h0, Tensor(3, 8), true};
  auto build = [&](Graph& g) {
    nn::Scope p(g, fx.store);
    Var logits = forward(p, fx.cfg, 2, g.parameter(hp), g.constant(vp), 1);
    std::vector<std::int32_t> t(logits.rows());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<std::int32_t>((3 * i + 1) % 6);
    return grad::cross_entropy(logits, t);
  };
  auto params = fx.store.all();
  params.push_back(&hp);
  grad::GradCheckOptions opt;
  opt.tolerance = 1e-4;
  opt.abs_floor = 1e-6;
  const auto rep = grad::finite_diff_check(build, params, opt);
  EXPECT_TRUE(rep.passed()) << rep.worst << " " << rep.max_rel_error;
}

CodecSpec spec_for(Rational fps, Rational r) {
  CodecSpec s;
  s.fps = fps;
  s.tokens_per_frame = r;
  s.audio_vocab = 64;
  return s;
}

TEST(Codec, EmptyStream) { EXPECT_TRUE(toy_decode({}, spec_for(Rational(25), Rational(2))).empty()); }

TEST(Codec, LengthArithmetic) {
  const auto s = spec_for(Rational(25), Rational(2));
  EXPECT_EQ(toy_decode(std::vector<std::int32_t>(7, 3), s).size(), 7u * 320u);
  const auto s2 = spec_for(Rational(25), Rational(3, 2));  // 426.67 samples per token
  EXPECT_EQ(toy_decode(std::vector<std::int32_t>(3, 3), s2).size(), 1280u);
}

TEST(Codec, RoundTripAgainstDftOracle) {
  std::mt19937_64 rng(12);
  for (const Rational r : {Rational(1), Rational(2), Rational(3, 2)}) {
    const auto s = spec_for(Rational(25), r);
    ASSERT_NO_THROW(s.validate());
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<std::int32_t> tokens(1 + rng() % 12);
      for (auto& t : tokens) t = static_cast<std::int32_t>(rng() % 64);
      const auto wave = toy_decode(tokens, s);
      EXPECT_EQ(detect_tokens(wave, tokens.size(), s), tokens);
      EXPECT_EQ(testing::dft_peak_tokens(wave, tokens.size(), s), tokens);
    }
  }
}

TEST(Codec, ValidateRejectsAliasing) {
  auto s = spec_for(Rational(25), Rational(2));
  s.audio_vocab = 100;  // 10.1 kHz > Nyquist
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Codec, WavRoundTrip) {
  const auto s = spec_for(Rational(25), Rational(2));
  const std::vector<std::int32_t> tokens{1, 5, 9, 63};
  const auto wave = toy_decode(tokens, s);
  const auto path = (std::filesystem::temp_directory_path() / "dyad_codec_test.wav").string();
  write_wav(path, wave, 16000);
  std::int64_t sr = 0;
  const auto back = read_wav(path, &sr);
  EXPECT_EQ(sr, 16000);
  ASSERT_EQ(back.size(), wave.size());
  EXPECT_EQ(detect_tokens(back, tokens.size(), s), tokens);
  const auto bytes = wav_bytes(wave, 16000);
  EXPECT_EQ(bytes.size(), 44 + 2 * wave.size());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace dyad::voice
