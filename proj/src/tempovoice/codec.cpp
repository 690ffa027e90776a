// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/tempovoice/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "dyad/error.hpp"

namespace dyad::voice {

std::int64_t CodecSpec::boundary(std::int64_t mu) const {
  // mu * sr / (fps * r) = mu * sr * fps.den * r.den / (fps.num * r.num)
  const std::int64_t num = mu * sample_rate * fps.den() * tokens_per_frame.den();
  const std::int64_t den = fps.num() * tokens_per_frame.num();
  return num / den;
}

void CodecSpec::validate() const {
  if (sample_rate <= 0 || !fps.positive() || !tokens_per_frame.positive()) {
    throw ConfigError("codec: rates must be positive");
  }
  const double top = frequency(static_cast<std::int32_t>(audio_vocab) - 1);
  if (top >= 0.5 * static_cast<double>(sample_rate)) {
    throw ConfigError("codec: token " + std::to_string(audio_vocab - 1) + " at " + std::to_string(top) +
                      " Hz reaches the Nyquist limit");
  }
  const std::int64_t shortest = boundary(1) - boundary(0);
  if (static_cast<double>(shortest) * step_hz < static_cast<double>(sample_rate)) {
    throw ConfigError("codec: token slots of " + std::to_string(shortest) +
                      " samples cannot resolve a " + std::to_string(step_hz) + " Hz spacing");
  }
}

std::vector<double> toy_decode(const std::vector<std::int32_t>& tokens, const CodecSpec& spec) {
  const auto n = static_cast<std::int64_t>(tokens.size());
  std::vector<double> wave(static_cast<std::size_t>(spec.boundary(n)), 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::int64_t mu = 0; mu < n; ++mu) {
    const std::int32_t v = tokens[static_cast<std::size_t>(mu)];
    if (v < 0 || static_cast<std::size_t>(v) >= spec.audio_vocab) {
      throw IndexError("audio token " + std::to_string(v) + " outside vocabulary");
    }
    const double w = two_pi * spec.frequency(v) / static_cast<double>(spec.sample_rate);
    const std::int64_t b0 = spec.boundary(mu), b1 = spec.boundary(mu + 1);
    for (std::int64_t s = b0; s < b1; ++s) {
      wave[static_cast<std::size_t>(s)] = spec.amplitude * std::sin(w * static_cast<double>(s - b0));
    }
  }
  return wave;
}

std::vector<std::int32_t> detect_tokens(const std::vector<double>& wave, std::size_t n_tokens, const CodecSpec& spec) {
  if (static_cast<std::int64_t>(wave.size()) < spec.boundary(static_cast<std::int64_t>(n_tokens))) {
    throw ContractError("waveform shorter than the requested token count");
  }
  std::vector<std::int32_t> out(n_tokens);
  for (std::size_t mu = 0; mu < n_tokens; ++mu) {
    const std::int64_t b0 = spec.boundary(static_cast<std::int64_t>(mu));
    const std::int64_t b1 = spec.boundary(static_cast<std::int64_t>(mu) + 1);
    double best = -1.0;
    std::int32_t arg = 0;
    for (std::size_t v = 0; v < spec.audio_vocab; ++v) {
      const double coeff = 2.0 * std::cos(2.0 * std::numbers::pi * spec.frequency(static_cast<std::int32_t>(v)) /
                                           static_cast<double>(spec.sample_rate));
      double s1 = 0.0, s2 = 0.0;
      for (std::int64_t s = b0; s < b1; ++s) {
        const double s0 = wave[static_cast<std::size_t>(s)] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
      }
      const double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
      if (power > best) {
        best = power;
        arg = static_cast<std::int32_t>(v);
      }
    }
    out[mu] = arg;
  }
  return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

std::uint32_t get_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b.at(at + static_cast<std::size_t>(i));
  return v;
}
std::uint16_t get_u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b.at(at) | (b.at(at + 1) << 8));
}

}  // namespace

std::vector<std::uint8_t> wav_bytes(const std::vector<double>& wave, std::int64_t sample_rate) {
  const auto data_len = static_cast<std::uint32_t>(wave.size() * 2);
  std::vector<std::uint8_t> b;
  b.reserve(44 + data_len);
  put_tag(b, "RIFF");
  put_u32(b, 36 + data_len);
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, 1);  // PCM
  put_u16(b, 1);  // mono
  put_u32(b, static_cast<std::uint32_t>(sample_rate));
  put_u32(b, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(b, 2);
  put_u16(b, 16);
  put_tag(b, "data");
  put_u32(b, data_len);
  for (double x : wave) {
    const double c = std::clamp(x, -1.0, 1.0);
    put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  return b;
}

void write_wav(const std::string& path, const std::vector<double>& wave, std::int64_t sample_rate) {
  const auto bytes = wav_bytes(wave, sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> read_wav(const std::string& path, std::int64_t* sample_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (b.size() < 44 || std::string(b.begin(), b.begin() + 4) != "RIFF" ||
      std::string(b.begin() + 8, b.begin() + 12) != "WAVE") {
    throw ValidationError(path + ": not a RIFF/WAVE file");
  }
  if (get_u16(b, 20) != 1 || get_u16(b, 22) != 1 || get_u16(b, 34) != 16) {
    throw ValidationError(path + ": only 16-bit PCM mono is supported");
  }
  if (sample_rate != nullptr) *sample_rate = get_u32(b, 24);
  const std::uint32_t len = get_u32(b, 40);
  if (44 + static_cast<std::size_t>(len) > b.size()) throw ValidationError(path + ": truncated data chunk");
  std::vector<double> out(len / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int16_t>(get_u16(b, 44 + 2 * i)) / 32767.0;
  }
  return out;
}

}  // namespace dyad::voice
