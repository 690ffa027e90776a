// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/synth_data/dataset.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "dyad/error.hpp"

namespace dyad::synth {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kFaceMagic[8] = {'D', 'Y', 'A', 'D', 'F', 'A', 'C', 'E'};

json words_json(const chrono::TimedTranscript& t) {
  json arr = json::array();
  for (const auto& w : t.words) arr.push_back({{"t", w.text}, {"s", w.start}, {"e", w.end}});
  return arr;
}

chrono::TimedTranscript words_from(const json& arr, chrono::Channel ch) {
  chrono::TimedTranscript t{{}, ch};
  for (const auto& w : arr) t.words.push_back({w.at("t").get<std::string>(), w.at("s").get<double>(), w.at("e").get<double>()});
  return t;
}

Rational rational_from(const json& j) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  return Rational(j.get<std::int64_t>());
}

ManifestRecord parse_record(const std::string& text, std::size_t line) {
  const json j = json::parse(text);
  ManifestRecord r;
  r.line = line;
  r.id = j.at("id").get<std::string>();
  r.split = parse_split(j.at("split").get<std::string>());
  r.fps = rational_from(j.at("fps"));
  r.frames = j.at("frames").get<std::size_t>();
  r.speaker_faces = j.at("speaker_faces").get<std::string>();
  r.listener_faces = j.at("listener_faces").get<std::string>();
  r.speaker_words = words_from(j.at("speaker_words"), chrono::Channel::Speaker);
  r.listener_words = words_from(j.at("listener_words"), chrono::Channel::Listener);
  r.listener_audio_tokens = j.at("listener_audio_tokens").get<std::string>();
  r.voiceprint = j.at("voiceprint").get<std::vector<double>>();
  r.topic = j.at("topic").get<std::string>();
  if (j.contains("audio_tokens_per_frame")) r.audio_tokens_per_frame = rational_from(j.at("audio_tokens_per_frame"));
  if (!r.fps.positive()) throw ValidationError("fps must be positive");
  try {
    chrono::validate_transcript(r.speaker_words);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("speaker_words ") + e.what());
  }
  try {
    chrono::validate_transcript(r.listener_words);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("listener_words ") + e.what());
  }
  return r;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split '" + std::string(s) + "' (expected train, val or test)");
}

std::size_t Manifest::count(Split s) const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.split == s;
  return n;
}

DyadSample Manifest::load_sample(std::size_t index) const {
  if (index >= records.size()) throw IndexError("manifest has no record " + std::to_string(index));
  const ManifestRecord& r = records[index];
  const fs::path base(root);
  DyadSample s;
  s.id = r.id;
  s.topic = r.topic;
  s.fps = r.fps;
  s.frames = r.frames;
  s.speaker_faces = read_faces((base / r.speaker_faces).string());
  s.listener_faces = read_faces((base / r.listener_faces).string());
  s.speaker_words = r.speaker_words;
  s.listener_words = r.listener_words;
  s.audio_tokens_per_frame = r.audio_tokens_per_frame;
  s.voiceprint = r.voiceprint;
  const std::string audio_path = (base / r.listener_audio_tokens).string();
  std::ifstream in(audio_path);
  if (!in) throw IoError("cannot open audio tokens '" + audio_path + "'");
  try {
    s.listener_audio = json::parse(in).get<std::vector<std::int32_t>>();
  } catch (const json::exception& e) {
    throw ValidationError("audio tokens '" + audio_path + "': " + e.what());
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("manifest line " + std::to_string(r.line) + ": " + e.what());
  }
  return s;
}

std::vector<DyadSample> Manifest::load_split(Split s) const {
  std::vector<DyadSample> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == s) out.push_back(load_sample(i));
  }
  return out;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  Manifest m;
  m.root = fs::path(path).parent_path().string();
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      m.records.push_back(parse_record(text, line));
    } catch (const json::exception& e) {
      throw ValidationError("manifest line " + std::to_string(line) + ": " + e.what());
    } catch (const Error& e) {
      throw ValidationError("manifest line " + std::to_string(line) + ": " + e.what());
    }
  }
  return m;
}

void write_faces(const std::string& path, const grad::Tensor& faces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kFaceMagic, sizeof kFaceMagic);
  std::uint64_t n = faces.rows();
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(n >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(faces[i]));
    for (int b = 0; b < 4; ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(buf), 4);
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

grad::Tensor read_faces(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[8];
  unsigned char buf[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kFaceMagic, 8) != 0) throw IoError("'" + path + "' is not a face stream");
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw IoError("'" + path + "' is truncated");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if (n > (1ull << 32)) throw IoError("'" + path + "' declares an implausible frame count");
  grad::Tensor t(static_cast<std::size_t>(n), 64);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!in.read(reinterpret_cast<char*>(buf), 4)) throw IoError("'" + path + "' is truncated");
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[b]) << (8 * b);
    t[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return t;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<std::size_t, 3>& weights) {
  const std::size_t sum = weights[0] + weights[1] + weights[2];
  if (sum == 0) throw ConfigError("split weights must not all be zero");
  std::array<std::size_t, 3> out{};
  out[0] = n * weights[0] / sum;
  out[1] = n * weights[1] / sum;
  out[2] = n - out[0] - out[1];
  return out;
}

std::vector<Split> split_dataset(std::size_t n, const std::array<std::size_t, 3>& weights, std::uint64_t seed) {
  const auto sizes = split_sizes(n, weights);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
  std::vector<Split> out(n, Split::Test);
  for (std::size_t k = 0; k < n; ++k) {
    out[order[k]] = k < sizes[0] ? Split::Train : (k < sizes[0] + sizes[1] ? Split::Val : Split::Test);
  }
  return out;
}

void write_dataset(const std::string& dir, const std::vector<DyadSample>& samples, const std::vector<Split>& splits) {
  if (samples.size() != splits.size()) throw DimensionError("one split label per sample is required");
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.jsonl");
  if (!manifest) throw IoError("cannot write manifest in '" + dir + "'");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const DyadSample& s = samples[i];
    s.validate();
    const std::string spk = s.id + ".speaker.face", lis = s.id + ".listener.face", aud = s.id + ".audio.json";
    write_faces((fs::path(dir) / spk).string(), s.speaker_faces);
    write_faces((fs::path(dir) / lis).string(), s.listener_faces);
    std::ofstream(fs::path(dir) / aud) << json(s.listener_audio).dump() << '\n';
    json rec;
    rec["id"] = s.id;
    rec["split"] = std::string(split_name(splits[i]));
    rec["fps"] = s.fps.str();
    rec["frames"] = s.frames;
    rec["speaker_faces"] = spk;
    rec["listener_faces"] = lis;
    rec["speaker_words"] = words_json(s.speaker_words);
    rec["listener_words"] = words_json(s.listener_words);
    rec["listener_audio_tokens"] = aud;
    rec["audio_tokens_per_frame"] = s.audio_tokens_per_frame.str();
    rec["voiceprint"] = s.voiceprint;
    rec["topic"] = s.topic;
    manifest << rec.dump() << '\n';
  }
  if (!manifest) throw IoError("manifest write failed in '" + dir + "'");
}

}  // namespace dyad::synth
