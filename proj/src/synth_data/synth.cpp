// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/synth_data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dyad/error.hpp"
#include "dyad/kv_config.hpp"
#include "dyad/model_core/model.hpp"

namespace dyad::synth {
namespace {

struct Topic {
  const char* name;
  std::vector<std::string> words;
};

const std::vector<std::string> kOpeners{"so", "well", "hey", "look"};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> t{
      {"weather", {"rain", "sun", "cold", "wind", "snow"}},
      {"food", {"pasta", "bread", "soup", "rice", "cake"}},
      {"music", {"song", "drums", "piano", "band", "jazz"}},
      {"travel", {"train", "beach", "hotel", "city", "plane"}},
  };
  return t;
}

const std::vector<std::vector<std::string>> kReplies{{"oh", "really"}, {"nice"},  {"i", "see"},
                                                    {"wow"},          {"yes", "sure"}, {"right"}};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::size_t pick(std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(eng_() % (hi - lo + 1)); }
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * uniform());
  }

 private:
  std::mt19937_64 eng_;
};

std::size_t topic_index(std::string_view word) {
  for (std::size_t i = 0; i < topics().size(); ++i) {
    const auto& w = topics()[i].words;
    if (std::find(w.begin(), w.end(), word) != w.end()) return i;
  }
  return 0;
}

std::size_t phrase_frames(const std::vector<std::string>& words) {
  std::size_t n = 0;
  for (const auto& w : words) n += word_frames(w);
  return n;
}

// Places words back to back from `frame`; returns the frame after the last.
std::size_t place(chrono::TimedTranscript& t, const std::vector<std::string>& words, std::size_t frame, Rational fps) {
  for (const auto& w : words) {
    const std::size_t len = word_frames(w);
    t.words.push_back({w, chrono::frame_time(static_cast<std::int64_t>(frame), fps),
                       chrono::frame_time(static_cast<std::int64_t>(frame + len), fps)});
    frame += len;
  }
  return frame;
}

grad::Tensor synth_faces(const std::vector<double>& speaking, Rng& rng, double noise) {
  using model::kBlendshapeDim;
  using model::kFacialDim;
  using model::kJawOpen;
  const std::size_t n = speaking.size();
  grad::Tensor out(n, kFacialDim);
  std::vector<double> level(kFacialDim);
  auto redraw = [&] {
    for (std::size_t c = 0; c < kBlendshapeDim; ++c) level[c] = 0.05 + 0.25 * rng.uniform();
    for (std::size_t c = 0; c < model::kPoseDim; ++c) {
      const bool diagonal = c == 0 || c == 5 || c == 10;
      level[kBlendshapeDim + c] = (diagonal ? 1.0 : 0.0) + 0.02 * rng.normal();
    }
  };
  redraw();
  for (std::size_t f = 0; f < n; ++f) {
    if (f > 0 && speaking[f] != speaking[f - 1]) redraw();
    for (std::size_t c = 0; c < kFacialDim; ++c) {
      double v = level[c] + noise * rng.normal();
      if (c < kBlendshapeDim) v = std::clamp(v, 0.0, 1.0);
      if (c == kJawOpen) v = speaking[f] > 0.5 ? kJawSpeaking : kJawSilent;
      // Stored as float32 on disk; keep the in-memory copy identical.
      out(f, c) = static_cast<double>(static_cast<float>(v));
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string>& grammar_words() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w = kOpeners;
    for (const auto& t : topics()) w.insert(w.end(), t.words.begin(), t.words.end());
    for (const auto& r : kReplies) {
      for (const auto& x : r) {
        if (std::find(w.begin(), w.end(), x) == w.end()) w.push_back(x);
      }
    }
    return w;
  }();
  return words;
}

std::size_t word_frames(std::string_view word) { return 2 + word.size() % 3; }

std::vector<std::string> reply_for(const std::vector<std::string>& phrase) {
  if (phrase.empty()) return {};
  const auto op = static_cast<std::size_t>(std::find(kOpeners.begin(), kOpeners.end(), phrase.front()) -
                                           kOpeners.begin());
  const std::size_t topic = phrase.size() > 1 ? topic_index(phrase[1]) : 0;
  return kReplies[(op + topic) % kReplies.size()];
}

std::int32_t word_audio_token(std::string_view word, std::size_t audio_vocab) {
  return 1 + static_cast<std::int32_t>(fnv1a(word) % (audio_vocab - 1));
}

std::vector<double> word_occupancy(const chrono::TimedTranscript& t, Rational fps, std::size_t frames) {
  std::vector<double> occ(frames, 0.0);
  for (const auto& w : t.words) {
    const auto a = std::max<std::int64_t>(0, chrono::frame_of(w.start, fps));
    const auto b = std::min<std::int64_t>(static_cast<std::int64_t>(frames) - 1, chrono::last_frame_before(w.end, fps));
    for (auto f = a; f <= b; ++f) occ[static_cast<std::size_t>(f)] = 1.0;
  }
  return occ;
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("synth spec: " + m); };
  if (!fps.positive() || !audio_tokens_per_frame.positive()) fail("rates must be positive");
  if (lead_in_min > lead_in_max || phrase_words_min > phrase_words_max || gap_min > gap_max) {
    fail("range minimum above maximum");
  }
  if (phrase_words_min < 2) fail("phrases need at least two words (opener + topic word)");
  if (audio_vocab < 2) fail("audio_vocab must be at least 2");
  if (!(face_noise >= 0.0)) fail("face_noise must be non-negative");
  // Longest possible exchange must fit: 4 frames per word at most.
  const std::size_t longest = lead_in_max + 4 * phrase_words_max + (listener_silent ? 0 : response_delay + 8);
  if (longest > frames) {
    fail("an exchange can take " + std::to_string(longest) + " frames but dialogues have " + std::to_string(frames));
  }
}

bool SynthSpec::set(std::string_view key, std::string_view value) {
  if (key == "synth_fps") {
    fps = Rational::parse(value);
  } else if (key == "synth_frames") {
    frames = kv_size(key, value);
  } else if (key == "synth_lead_in_min") {
    lead_in_min = kv_size(key, value);
  } else if (key == "synth_lead_in_max") {
    lead_in_max = kv_size(key, value);
  } else if (key == "synth_phrase_words_min") {
    phrase_words_min = kv_size(key, value);
  } else if (key == "synth_phrase_words_max") {
    phrase_words_max = kv_size(key, value);
  } else if (key == "synth_response_delay") {
    response_delay = kv_size(key, value);
  } else if (key == "synth_gap_min") {
    gap_min = kv_size(key, value);
  } else if (key == "synth_gap_max") {
    gap_max = kv_size(key, value);
  } else if (key == "synth_listener_silent") {
    listener_silent = kv_bool(key, value);
  } else if (key == "synth_face_noise") {
    face_noise = kv_double(key, value);
  } else {
    return false;
  }
  return true;
}

std::string SynthSpec::to_kv() const {
  std::ostringstream os;
  os.precision(17);
  os << "synth_fps=" << fps.str() << "\nsynth_frames=" << frames << "\nsynth_lead_in_min=" << lead_in_min
     << "\nsynth_lead_in_max=" << lead_in_max << "\nsynth_phrase_words_min=" << phrase_words_min
     << "\nsynth_phrase_words_max=" << phrase_words_max << "\nsynth_response_delay=" << response_delay
     << "\nsynth_gap_min=" << gap_min << "\nsynth_gap_max=" << gap_max
     << "\nsynth_listener_silent=" << (listener_silent ? "true" : "false") << "\nsynth_face_noise=" << face_noise << "\n";
  return os.str();
}

DyadSample generate_dialogue(std::uint64_t seed, const SynthSpec& spec) {
  spec.validate();
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 17);
  DyadSample s;
  s.id = "synth-" + std::to_string(seed);
  s.fps = spec.fps;
  s.frames = spec.frames;
  s.audio_tokens_per_frame = spec.audio_tokens_per_frame;
  const std::size_t topic = rng.pick(0, topics().size() - 1);
  s.topic = topics()[topic].name;

  std::size_t f = rng.pick(spec.lead_in_min, spec.lead_in_max);
  while (true) {
    std::vector<std::string> phrase{kOpeners[rng.pick(0, kOpeners.size() - 1)]};
    const std::size_t k = rng.pick(spec.phrase_words_min, spec.phrase_words_max);
    const auto& pool = topics()[topic].words;
    while (phrase.size() < k) phrase.push_back(pool[rng.pick(0, pool.size() - 1)]);
    const auto reply = spec.listener_silent ? std::vector<std::string>{} : reply_for(phrase);
    const std::size_t need = phrase_frames(phrase) + (reply.empty() ? 0 : spec.response_delay + phrase_frames(reply));
    if (f + need > spec.frames) break;
    std::size_t end = place(s.speaker_words, phrase, f, spec.fps);
    if (!reply.empty()) end = place(s.listener_words, reply, end + spec.response_delay, spec.fps);
    f = end + rng.pick(spec.gap_min, spec.gap_max);
  }
  if (s.speaker_words.words.empty()) throw ConfigError("synth spec leaves no room for a single exchange");

  const auto spk_occ = word_occupancy(s.speaker_words, spec.fps, spec.frames);
  const auto lis_occ = word_occupancy(s.listener_words, spec.fps, spec.frames);
  s.speaker_faces = synth_faces(spk_occ, rng, spec.face_noise);
  s.listener_faces = synth_faces(lis_occ, rng, spec.face_noise);

  const Rational r = spec.audio_tokens_per_frame;
  const auto stream = chrono::encode_transcript(s.listener_words, spec.fps, spec.frames);
  const std::int64_t n_audio = r.ceil_mul(static_cast<std::int64_t>(spec.frames));
  std::string current;
  std::vector<std::int32_t> per_frame(spec.frames, 0);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const auto& tok = stream.tokens[t];
    if (tok.is_word()) current = tok.text;
    if (tok.is_pause()) current.clear();
    per_frame[t] = current.empty() ? 0 : word_audio_token(current, spec.audio_vocab);
  }
  for (std::int64_t mu = 0; mu < n_audio; ++mu) {
    s.listener_audio.push_back(per_frame[static_cast<std::size_t>(r.floor_div_by(mu))]);
  }
  s.voiceprint.resize(spec.voiceprint_dim);
  for (double& v : s.voiceprint) v = rng.normal();
  return s;
}

void DyadSample::validate() const {
  const std::string where = "sample '" + id + "'";
  if (!fps.positive()) throw ValidationError(where + ": fps must be positive");
  if (speaker_faces.rows() != frames || listener_faces.rows() != frames) {
    throw ValidationError(where + ": facial streams do not have " + std::to_string(frames) + " frames");
  }
  model::validate_faces(speaker_faces, where + " speaker faces");
  model::validate_faces(listener_faces, where + " listener faces");
  if (static_cast<std::int64_t>(listener_audio.size()) != audio_tokens_per_frame.ceil_mul(static_cast<std::int64_t>(frames))) {
    throw ValidationError(where + ": expected " +
                          std::to_string(audio_tokens_per_frame.ceil_mul(static_cast<std::int64_t>(frames))) +
                          " audio tokens, got " + std::to_string(listener_audio.size()));
  }
  try {
    chrono::encode_transcript(speaker_words, fps, frames);
    chrono::encode_transcript(listener_words, fps, frames);
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

}  // namespace dyad::synth
