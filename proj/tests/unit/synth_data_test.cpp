// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "dyad/error.hpp"
#include "dyad/kv_config.hpp"
#include "dyad/model_core/config.hpp"
#include "dyad/synth_data/dataset.hpp"

namespace dyad::synth {
namespace {

namespace fs = std::filesystem;

// Occupancy recomputed straight from the word times: frame f is covered when
// its centre lies inside [start, end).
std::vector<double> occupancy_by_centres(const chrono::TimedTranscript& t, Rational fps, std::size_t frames) {
  std::vector<double> occ(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const double c = (static_cast<double>(f) + 0.5) * fps.den() / fps.num();
    for (const auto& w : t.words) {
      if (c >= w.start && c < w.end) occ[f] = 1.0;
    }
  }
  return occ;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i] / n, mb += b[i] / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> vals(const grad::Tensor& t) { return {t.data().begin(), t.data().end()}; }

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dyad_synth_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(SynthData, SameSeedIdentical) {
  SynthSpec spec;
  const auto a = generate_dialogue(7, spec), b = generate_dialogue(7, spec);
  EXPECT_EQ(vals(a.speaker_faces), vals(b.speaker_faces));
  EXPECT_EQ(vals(a.listener_faces), vals(b.listener_faces));
  EXPECT_EQ(a.listener_audio, b.listener_audio);
  EXPECT_EQ(a.voiceprint, b.voiceprint);
  ASSERT_EQ(a.speaker_words.words.size(), b.speaker_words.words.size());
  for (std::size_t i = 0; i < a.speaker_words.words.size(); ++i) {
    EXPECT_EQ(a.speaker_words.words[i].text, b.speaker_words.words[i].text);
    EXPECT_EQ(a.speaker_words.words[i].start, b.speaker_words.words[i].start);
  }
  const auto c = generate_dialogue(8, spec);
  EXPECT_NE(vals(a.speaker_faces), vals(c.speaker_faces));
}

TEST(SynthData, ListenerSilentMode) {
  SynthSpec spec;
  spec.listener_silent = true;
  const auto s = generate_dialogue(3, spec);
  EXPECT_TRUE(s.listener_words.words.empty());
  const auto stream = chrono::encode_transcript(s.listener_words, s.fps, s.frames);
  for (const auto& t : stream.tokens) EXPECT_TRUE(t.is_pause());
  for (auto a : s.listener_audio) EXPECT_EQ(a, 0);
  EXPECT_FALSE(s.speaker_words.words.empty());
}

TEST(SynthData, JawTracksOccupancyExactly) {
  SynthSpec spec;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = generate_dialogue(seed, spec);
    for (int who = 0; who < 2; ++who) {
      const auto& words = who == 0 ? s.speaker_words : s.listener_words;
      const auto& faces = who == 0 ? s.speaker_faces : s.listener_faces;
      const auto occ = occupancy_by_centres(words, s.fps, s.frames);
      EXPECT_EQ(occ, word_occupancy(words, s.fps, s.frames));
      std::vector<double> jaw(s.frames);
      for (std::size_t f = 0; f < s.frames; ++f) {
        jaw[f] = faces(f, model::kJawOpen);
        EXPECT_EQ(jaw[f], occ[f] > 0 ? static_cast<double>(static_cast<float>(kJawSpeaking))
                                     : static_cast<double>(static_cast<float>(kJawSilent)));
      }
      EXPECT_NEAR(pearson(jaw, occ), 1.0, 1e-12) << "seed " << seed << " who " << who;
    }
  }
}

TEST(SynthData, AudioOnListenerWordFramesOnly) {
  SynthSpec spec;
  spec.audio_tokens_per_frame = Rational(3, 2);
  const auto s = generate_dialogue(11, spec);
  const auto occ = occupancy_by_centres(s.listener_words, s.fps, s.frames);
  ASSERT_EQ(s.listener_audio.size(), static_cast<std::size_t>((s.frames * 3 + 1) / 2));
  for (std::size_t mu = 0; mu < s.listener_audio.size(); ++mu) {
    const std::size_t owner = mu * 2 / 3;
    EXPECT_EQ(s.listener_audio[mu] != 0, occ[owner] > 0) << "token " << mu;
  }
}

TEST(SynthData, TurnTakingStructure) {
  SynthSpec spec;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = generate_dialogue(seed, spec);
    s.validate();
    EXPECT_EQ(s.speaker_faces.rows(), s.frames);
    EXPECT_EQ(s.listener_faces.rows(), s.frames);
    // Speaker and listener never talk at the same time.
    const auto a = word_occupancy(s.speaker_words, s.fps, s.frames);
    const auto b = word_occupancy(s.listener_words, s.fps, s.frames);
    for (std::size_t f = 0; f < s.frames; ++f) EXPECT_FALSE(a[f] > 0 && b[f] > 0);
    for (const auto& w : s.listener_words.words) {
      EXPECT_NE(std::find(grammar_words().begin(), grammar_words().end(), w.text), grammar_words().end());
    }
  }
}

TEST(SynthData, ReplyDependsOnPhrase) {
  EXPECT_EQ(reply_for({"so", "rain"}), reply_for({"so", "snow", "wind"}));
  EXPECT_NE(reply_for({"so", "rain"}), reply_for({"well", "rain"}));
  EXPECT_TRUE(reply_for({}).empty());
}

TEST(SynthData, InfeasibleSpecRejected) {
  SynthSpec spec;
  spec.frames = 10;
  EXPECT_THROW(generate_dialogue(1, spec), ConfigError);
  SynthSpec bad;
  bad.gap_min = 9;
  bad.gap_max = 3;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(SynthData, SpecKeyValueRoundTrip) {
  SynthSpec spec;
  spec.frames = 77;
  spec.fps = Rational(25, 2);
  spec.listener_silent = true;
  SynthSpec back;
  for (const auto& e : parse_kv(spec.to_kv(), "test")) ASSERT_TRUE(back.set(e.key, e.value)) << e.key;
  EXPECT_EQ(back.to_kv(), spec.to_kv());
  EXPECT_FALSE(back.set("nonsense", "1"));
}

TEST(Split, SizesFollowFloorRule) {
  EXPECT_EQ(split_sizes(696, {6, 2, 2}), (std::array<std::size_t, 3>{417, 139, 140}));
  EXPECT_EQ(split_sizes(10, {6, 2, 2}), (std::array<std::size_t, 3>{6, 2, 2}));
  EXPECT_EQ(split_sizes(0, {6, 2, 2}), (std::array<std::size_t, 3>{0, 0, 0}));
  EXPECT_THROW(split_sizes(5, {0, 0, 0}), ConfigError);
}

TEST(Split, DisjointAndExactForManySeeds) {
  for (std::size_t n : {0u, 1u, 7u, 10u, 33u, 696u}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto labels = split_dataset(n, {6, 2, 2}, seed);
      ASSERT_EQ(labels.size(), n);
      const auto sizes = split_sizes(n, {6, 2, 2});
      std::array<std::size_t, 3> got{};
      for (auto l : labels) ++got[static_cast<std::size_t>(l)];
      EXPECT_EQ(got, sizes);
    }
  }
  EXPECT_EQ(split_dataset(50, {6, 2, 2}, 4), split_dataset(50, {6, 2, 2}, 4));
  EXPECT_NE(split_dataset(50, {6, 2, 2}, 4), split_dataset(50, {6, 2, 2}, 5));
}

TEST(Manifest, WriteLoadRoundTrip) {
  const auto dir = temp_dir("roundtrip");
  SynthSpec spec;
  std::vector<DyadSample> samples;
  for (std::uint64_t i = 0; i < 5; ++i) samples.push_back(generate_dialogue(100 + i, spec));
  const auto splits = split_dataset(5, {6, 2, 2}, 1);
  write_dataset(dir.string(), samples, splits);
  const auto m = load_manifest((dir / "manifest.jsonl").string());
  ASSERT_EQ(m.records.size(), 5u);
  EXPECT_EQ(m.count(Split::Train) + m.count(Split::Val) + m.count(Split::Test), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto s = m.load_sample(i);
    EXPECT_EQ(s.id, samples[i].id);
    EXPECT_EQ(vals(s.speaker_faces), vals(samples[i].speaker_faces));
    EXPECT_EQ(vals(s.listener_faces), vals(samples[i].listener_faces));
    EXPECT_EQ(s.listener_audio, samples[i].listener_audio);
    EXPECT_EQ(s.voiceprint, samples[i].voiceprint);
    EXPECT_EQ(m.records[i].split, splits[i]);
  }
}

TEST(Manifest, CountsMatchDeclaredSplit) {
  const auto dir = temp_dir("counts");
  std::ofstream out(dir / "manifest.jsonl");
  const char* labels[] = {"train", "val", "test"};
  const std::size_t counts[] = {417, 139, 140};
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < counts[s]; ++i) {
      out << R"({"id":"x","split":")" << labels[s]
          << R"(","fps":"10","frames":4,"speaker_faces":"a","listener_faces":"b","speaker_words":[],)"
          << R"("listener_words":[],"listener_audio_tokens":"c","voiceprint":[],"topic":"t"})" << "\n";
    }
  }
  out.close();
  const auto m = load_manifest((dir / "manifest.jsonl").string());
  EXPECT_EQ(m.count(Split::Train), 417u);
  EXPECT_EQ(m.count(Split::Val), 139u);
  EXPECT_EQ(m.count(Split::Test), 140u);
}

TEST(Manifest, EmptyManifestIsEmptyDataset) {
  const auto dir = temp_dir("empty");
  std::ofstream(dir / "manifest.jsonl") << "";
  const auto m = load_manifest((dir / "manifest.jsonl").string());
  EXPECT_TRUE(m.records.empty());
  EXPECT_TRUE(m.load_split(Split::Train).empty());
}

std::string error_of(const std::string& body) {
  const auto dir = temp_dir("errors");
  std::ofstream(dir / "manifest.jsonl") << body;
  try {
    load_manifest((dir / "manifest.jsonl").string());
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(Manifest, ErrorsNameLineAndPosition) {
  const std::string good =
      R"({"id":"x","split":"train","fps":10,"frames":4,"speaker_faces":"a","listener_faces":"b","speaker_words":[],)"
      R"("listener_words":[],"listener_audio_tokens":"c","voiceprint":[],"topic":"t"})";
  const std::string reversed =
      R"({"id":"x","split":"train","fps":10,"frames":40,"speaker_faces":"a","listener_faces":"b",)"
      R"("speaker_words":[{"t":"a","s":0.0,"e":0.5},{"t":"b","s":1.0,"e":0.8}],)"
      R"("listener_words":[],"listener_audio_tokens":"c","voiceprint":[],"topic":"t"})";
  std::string msg = error_of(good + "\n" + reversed + "\n");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("word 1"), std::string::npos) << msg;

  std::string bad_split = good;
  bad_split.replace(bad_split.find("train"), 5, "dev");
  msg = error_of(bad_split + "\n");
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("dev"), std::string::npos) << msg;

  std::string missing = good;
  missing.replace(missing.find(R"("topic":"t")"), 11, R"("other":"t")");
  msg = error_of("\n" + missing + "\n");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("topic"), std::string::npos) << msg;

  const std::string overlap =
      R"({"id":"x","split":"train","fps":10,"frames":40,"speaker_faces":"a","listener_faces":"b","speaker_words":[],)"
      R"("listener_words":[{"t":"a","s":0.0,"e":0.5},{"t":"b","s":0.4,"e":0.8}],)"
      R"("listener_audio_tokens":"c","voiceprint":[],"topic":"t"})";
  msg = error_of(overlap);
  EXPECT_NE(msg.find("overlaps"), std::string::npos) << msg;
}

TEST(FaceFile, RejectsBadMagicAndTruncation) {
  const auto dir = temp_dir("faces");
  grad::Tensor t(3, 64);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.25 * static_cast<double>(i % 4);
  write_faces((dir / "f.face").string(), t);
  EXPECT_EQ(vals(read_faces((dir / "f.face").string())), vals(t));
  EXPECT_EQ(fs::file_size(dir / "f.face"), 16u + 3u * 64u * 4u);
  fs::resize_file(dir / "f.face", 100);
  EXPECT_THROW(read_faces((dir / "f.face").string()), IoError);
  std::ofstream(dir / "g.face") << "NOTAFACE00000000";
  EXPECT_THROW(read_faces((dir / "g.face").string()), IoError);
}

}  // namespace
}  // namespace dyad::synth
